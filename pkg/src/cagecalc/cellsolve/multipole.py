"""Spectral collocation solver for disk wires on the periodic strip.

The basis consists of periodicised point multipoles at the disk centre,

    E_n(Z) = sum_m (Z - i m)^(-n),   Z = N + i S,   n = 1, 2, ...

(E_1 = pi*coth(pi Z), higher n are its derivatives), the one-sided linear
element u_lin = (pi N + log|2 sinh(pi Z)|)/(2 pi) which grows like N on the
right and decays on the left, and a constant.  All data here is symmetric
in S, so real coefficients of the real parts suffice.

Far-field constants come straight from the coefficients: Re E_1 -> +-pi and
every E_n with n >= 2 decays, so a solution c0 + u_lin + c1*Re E_1 + ...
has sigma_plus = c0 + pi*c1 and tau_plus = c0 - pi*c1.

Near delta = 1/2 the disk almost touches its periodic neighbours and the
multipole series degrades; callers switch to the finite-difference engine
beyond MULTIPOLE_DELTA_LIMIT.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta as hurwitz_zeta

from .. import numerics
from ..errors import DomainError, NoConvergence

__all__ = [
    "MULTIPOLE_DELTA_LIMIT",
    "lattice_sums",
    "u_linear",
    "u_linear_dz",
    "DiskCellSolution",
    "solve_dirichlet",
    "solve_neumann",
    "solve_dirichlet_tilde",
    "neumann_mu_constants",
]

MULTIPOLE_DELTA_LIMIT = 0.47

_TAIL_NMAX = 40  # image-sum tails are negligible relative to E_n beyond this


def _tail_coefficients(n, t_grid, q):
    """Taylor coefficients of sum_{|m|>q} (Z - i m)^(-n) about Z = 0."""
    p = (n + t_grid) // 2
    sign = np.where((t_grid % 2) == 0, 1.0, -1.0) * np.where((p % 2) == 0, 1.0, -1.0)
    binom = np.array(
        [math.comb(n + t - 1, t) for t in t_grid], dtype=float
    )
    zeta_vals = hurwitz_zeta(n + t_grid.astype(float), q + 1)
    return 2.0 * sign * binom * zeta_vals


def lattice_sums(Z, n_max, images=None):
    """E_n(Z) for n = 1..n_max; returns an array of shape (n_max,) + Z.shape."""
    Z = np.asarray(Z, dtype=complex)
    abs_max = float(np.max(np.abs(Z))) if Z.size else 0.0
    q = images if images is not None else max(3, int(math.ceil(abs_max)) + 2)
    out = np.zeros((n_max,) + Z.shape, dtype=complex)
    for m in range(-q, q + 1):
        w = 1.0 / (Z - 1j * m)
        acc = w.copy()
        for n in range(n_max):
            out[n] += acc
            if n + 1 < n_max:
                acc = acc * w
    # distant-image tails, expanded about Z = 0 (converges for |Z| < q + 1)
    ratio = abs_max / (q + 1)
    if ratio >= 0.999:
        raise DomainError("lattice_sums called with too few explicit images")
    zpow_cache = {}
    for n in range(1, min(n_max, _TAIL_NMAX) + 1):
        t = n % 2
        t_list = []
        while True:
            bound = (
                2.0
                * math.comb(n + t - 1, t)
                * hurwitz_zeta(n + t, q + 1)
                * abs_max ** t
            )
            t_list.append(t)
            if bound < 1e-18 and t > n % 2:
                break
            t += 2
            if t > 400:
                break
        t_grid = np.array(t_list, dtype=int)
        coeffs = _tail_coefficients(n, t_grid, q)
        tail = np.zeros(Z.shape, dtype=complex)
        for tt, cc in zip(t_grid, coeffs):
            if tt not in zpow_cache:
                zpow_cache[tt] = Z ** tt
            tail = tail + cc * zpow_cache[tt]
        out[n - 1] += tail
    return out


def u_linear(Z):
    """(pi N + log|2 sinh(pi Z)|) / (2 pi): slope 1 right, decays left."""
    Z = np.asarray(Z, dtype=complex)
    return (np.pi * Z.real + np.log(np.abs(2.0 * np.sinh(np.pi * Z)))) / (2.0 * np.pi)


def u_linear_dz(Z):
    """Complex derivative of the analytic completion of u_linear."""
    return 0.5 * (1.0 + 1.0 / np.tanh(np.pi * np.asarray(Z, dtype=complex)))


def _n_terms_default(delta):
    # neighbour-interaction convergence ratio ~ delta / (1 - delta)
    ratio = min(delta / (1.0 - delta), 0.95)
    n = int(math.ceil(-10.0 / math.log10(ratio))) if ratio > 0.01 else 12
    return int(np.clip(n + 8, 16, 320))


def _check_delta(delta):
    if not 0.0 < delta <= MULTIPOLE_DELTA_LIMIT:
        raise DomainError(
            f"multipole strip solver limited to 0 < delta <= {MULTIPOLE_DELTA_LIMIT}"
        )


@dataclass
class DiskCellSolution:
    """Collocation solution on the strip for one disk cell problem."""

    delta: float
    kind: str  # 'dirichlet+', 'dirichlet-', 'neumann', 'tilde+', 'tilde-'
    c0: float
    coeffs: np.ndarray = field(repr=False)  # multipole coefficients c_1..c_P
    residual: float = 0.0

    @property
    def n_terms(self):
        return len(self.coeffs)

    def _linear_part(self, Z):
        if self.kind == "dirichlet+":
            return u_linear(Z)
        if self.kind == "dirichlet-":
            return u_linear(Z) - np.asarray(Z, dtype=complex).real
        if self.kind == "neumann":
            return np.asarray(Z, dtype=complex).real
        return np.zeros(np.shape(Z))

    def _linear_part_dz(self, Z):
        if self.kind == "dirichlet+":
            return u_linear_dz(Z)
        if self.kind == "dirichlet-":
            return u_linear_dz(Z) - 1.0
        if self.kind == "neumann":
            return np.ones(np.shape(Z), dtype=complex)
        return np.zeros(np.shape(Z), dtype=complex)

    def value(self, Z):
        """Field value at strip points Z = N + i S (outside the disk)."""
        Z = np.asarray(Z, dtype=complex)
        E = lattice_sums(Z, self.n_terms)
        out = self._linear_part(Z) + self.c0
        out = out + np.tensordot(self.coeffs, E.real, axes=(0, 0))
        return out

    def complex_derivative(self, Z, order=1):
        """d^order/dZ^order of the analytic completion (order 1 or 2)."""
        Z = np.asarray(Z, dtype=complex)
        E = lattice_sums(Z, self.n_terms + order)
        n = np.arange(1, self.n_terms + 1)
        if order == 1:
            out = np.tensordot(-n * self.coeffs, E[1:], axes=(0, 0))
            if self.kind in ("dirichlet+", "dirichlet-"):
                out = out + u_linear_dz(Z) - (1.0 if self.kind == "dirichlet-" else 0.0)
            elif self.kind == "neumann":
                out = out + 1.0
            return out
        out = np.tensordot(n * (n + 1) * self.coeffs, E[2:], axes=(0, 0))
        if self.kind in ("dirichlet+", "dirichlet-"):
            out = out - 0.5 * np.pi / np.sinh(np.pi * Z) ** 2
        return out

    def boundary_flux(self, theta):
        """Outward normal derivative on the disk boundary at angles theta."""
        Z = self.delta * np.exp(1j * np.asarray(theta, dtype=float))
        return np.real(self.complex_derivative(Z) * np.exp(1j * np.asarray(theta)))

    # far-field constants
    @property
    def right_constant(self):
        return self.c0 + np.pi * self.coeffs[0]

    @property
    def left_constant(self):
        return self.c0 - np.pi * self.coeffs[0]


def _collocation_angles(n_terms, oversample=3.0):
    ncol = int(oversample * (n_terms + 2))
    return 2.0 * np.pi * (np.arange(ncol) + 0.5) / ncol


def _scaled_lstsq(A, rhs):
    scales = np.linalg.norm(A, axis=0)
    scales[scales == 0.0] = 1.0
    res = numerics.lstsq(A / scales, rhs, strict=False)
    return res.x / scales, res.residual_norm


def solve_dirichlet(delta, side="plus", n_terms=None):
    """Solve the Dirichlet cell problem for a disk; returns DiskCellSolution.

    side='plus' has unit slope on the right, side='minus' on the left.
    """
    _check_delta(delta)
    n_terms = n_terms or _n_terms_default(delta)
    theta = _collocation_angles(n_terms)
    Zb = delta * np.exp(1j * theta)
    E = lattice_sums(Zb, n_terms)
    A = np.column_stack([np.ones_like(theta), *(E.real)])
    lin = u_linear(Zb) if side == "plus" else u_linear(Zb) - Zb.real
    x, resid = _scaled_lstsq(A, -lin)
    kind = "dirichlet+" if side == "plus" else "dirichlet-"
    sol = DiskCellSolution(delta, kind, c0=float(x[0]), coeffs=x[1:], residual=resid)
    if resid > 1e-7:
        raise NoConvergence(
            f"disk Dirichlet collocation residual {resid:.2e} at delta={delta}"
        )
    return sol


def dirichlet_constants(delta, side="plus", n_terms=None):
    """(sigma, tau) for the chosen side."""
    sol = solve_dirichlet(delta, side=side, n_terms=n_terms)
    if side == "plus":
        return sol.right_constant, sol.left_constant, sol
    # Phi- ~ -N + sigma_- on the left, tau_- on the right
    return sol.left_constant, sol.right_constant, sol


def solve_neumann(delta, n_terms=None):
    """Solve the Neumann (blockage) cell problem for a disk."""
    _check_delta(delta)
    n_terms = n_terms or _n_terms_default(delta)
    theta = _collocation_angles(n_terms)
    Zb = delta * np.exp(1j * theta)
    E = lattice_sums(Zb, n_terms + 1)
    n = np.arange(1, n_terms + 1)
    phase = np.exp(1j * theta)
    # d/dnu Re E_n = Re(E_n'(Z) e^{i theta}), E_n' = -n E_{n+1}
    cols = [np.real(-nn * E[nn] * phase) for nn in n]
    A = np.column_stack(cols)
    x, resid = _scaled_lstsq(A, -np.cos(theta))
    sol = DiskCellSolution(delta, "neumann", c0=0.0, coeffs=x, residual=resid)
    if resid > 1e-7:
        raise NoConvergence(
            f"disk Neumann collocation residual {resid:.2e} at delta={delta}"
        )
    lam = float(np.pi * x[0])
    return sol, lam


def _disk_perturbations(theta, delta, model):
    """Boundary perturbation d and tangential correction d~ of wire model 1."""
    if model == 2:
        zero = np.zeros_like(theta)
        return zero, zero
    s, c = np.sin(theta), np.cos(theta)
    d = -0.5 * delta ** 2 * c * s ** 2
    d_tilde = delta * s * (1.0 - 1.5 * s ** 2)
    return d, d_tilde


def solve_dirichlet_tilde(delta, model=1, side="plus", n_terms=None):
    """Curvature-correction constants (sigma_tilde, tau_tilde) for a disk.

    The forced problem (forcing -2N Phi_NN - Phi_N, quadratic far field) is
    reduced to a harmonic one by splitting off -(N^2/2) Phi_N, which
    reproduces the forcing exactly; the remainder R is solved with the same
    basis and carries the constants.
    """
    _check_delta(delta)
    n_terms = n_terms or _n_terms_default(delta)
    phi = solve_dirichlet(delta, side=side, n_terms=n_terms)
    theta = _collocation_angles(n_terms)
    Zb = delta * np.exp(1j * theta)
    q = phi.boundary_flux(theta)
    d, _ = _disk_perturbations(theta, delta, model)
    nu_N = np.cos(theta)
    Nb = Zb.real
    rhs = -d * q + 0.5 * Nb ** 2 * nu_N * q  # R = Phi~ + (N^2/2) Phi_N on the disk
    E = lattice_sums(Zb, n_terms)
    A = np.column_stack([np.ones_like(theta), *(E.real)])
    x, resid = _scaled_lstsq(A, rhs)
    kind = "tilde+" if side == "plus" else "tilde-"
    rsol = DiskCellSolution(delta, kind, c0=float(x[0]), coeffs=x[1:], residual=resid)
    if resid > 1e-7:
        raise NoConvergence(f"tilde collocation residual {resid:.2e} at delta={delta}")
    if side == "plus":
        sigma_tilde = rsol.right_constant
        tau_tilde = rsol.left_constant
    else:
        # Phi~- ~ N^2/2 - sigma_tilde_- (left), -tau_tilde_- (right)
        sigma_tilde = -rsol.left_constant
        tau_tilde = -rsol.right_constant
    return float(sigma_tilde), float(tau_tilde), rsol


def neumann_mu_constants(delta, model=1, n_terms=None):
    """(mu_tilde, mu_hat, mu_check) for a disk from the blockage solution.

    mu_tilde comes from the divergence-theorem identity evaluated on the
    disk boundary; mu_hat vanishes by symmetry; mu_check = half the wire
    area.
    """
    _check_delta(delta)
    psi, lam = solve_neumann(delta, n_terms=n_terms)
    ncol = 8 * (psi.n_terms + 8)
    theta = 2.0 * np.pi * (np.arange(ncol) + 0.5) / ncol
    Zb = delta * np.exp(1j * theta)
    phase = np.exp(1j * theta)
    g1 = psi.complex_derivative(Zb, order=1)
    g2 = psi.complex_derivative(Zb, order=2)
    psi_val = psi.value(Zb)
    psi_N = np.real(g1)
    psi_nunu = np.real(g2 * phase ** 2)
    psi_tan = np.real(1j * g1 * phase)
    d, d_tilde = _disk_perturbations(theta, delta, model)
    nu_N = np.cos(theta)
    Nb = Zb.real
    integrand = (psi_val - 2.0 * Nb * psi_N) * nu_N + d * psi_nunu + d_tilde * psi_tan
    integral = np.sum(integrand) * (2.0 * np.pi / ncol) * delta
    mu_tilde = lam - 0.5 * integral
    mu_check = 0.5 * math.pi * delta ** 2
    return float(mu_tilde), 0.0, float(mu_check)
