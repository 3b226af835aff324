"""Homogenized outer models for the unit-circle cage.

Explicit modal series for the field inside the cage when the wires are
replaced by an effective interface on the unit circle:

* thin-wire regime: interface condition [dphi/dn] = alpha * phi with
  alpha = 2 pi / (eps (log(1/(2 pi delta)) + a0));
* thick-wire regime: leading interior field proportional to eps * tau_plus;
* Neumann perforated shell: interior estimates scaling like 1/(eps*lambda).

The source is a unit point source at z0 with free fields
-(1/2 pi) log|z - z0| (Laplace) and (i/4) H_0^(1)(k |z - z0|) (Helmholtz).
Helmholtz modal denominators use the Wronskian-reduced form
1 + (alpha/k) (Jm'/Jm - Hm'/Hm)^(-1) = 1 + (i pi alpha / 2) Jm(k) Hm(k),
which stays finite at the interior resonances.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidRegime, NearResonance, RegimeWarning
from .numerics import bessel_j, bessel_j_zeros, hankel1

__all__ = [
    "alpha_of",
    "delta_infinity",
    "OuterSeries",
    "laplace_thin_interior",
    "laplace_thick_interior",
    "helmholtz_thin_interior",
    "helmholtz_thick_interior",
    "NeumannShellEstimate",
    "neumann_shell",
]

_TAIL_REL = 1e-14
_M_CAP = 400


def delta_infinity(a0: float) -> float:
    """delta at which the thin-wire alpha blows up: log(1/(2 pi delta)) = -a0."""
    return math.exp(a0) / (2.0 * math.pi)


def alpha_of(delta, a0, epsilon):
    """Thin-wire interface strength alpha; InvalidRegime outside 0 < alpha < inf."""
    if delta <= 0.0 or epsilon <= 0.0:
        raise InvalidRegime("alpha_of requires delta > 0 and epsilon > 0")
    denom = math.log(1.0 / (2.0 * math.pi * delta)) + a0
    d_inf = delta_infinity(a0)
    if denom == 0.0:
        raise InvalidRegime(
            f"alpha infinite at delta = delta_inf = {d_inf:.6f}", delta_inf=d_inf
        )
    alpha = 2.0 * math.pi / (epsilon * denom)
    if alpha < 0.0:
        raise InvalidRegime(
            f"alpha = {alpha:.4g} < 0 for delta = {delta} > delta_inf = {d_inf:.6f};"
            " use the thick-wire model",
            delta_inf=d_inf,
        )
    return alpha


@dataclass(frozen=True)
class OuterSeries:
    """Cosine modal series for an interior homogenized solution.

    Laplace basis: rho^m cos(m (theta - theta0));
    Helmholtz basis: J_m(k rho) cos(m (theta - theta0)).
    Coefficients satisfy the truncation property: the dropped tail is below
    1e-10 of the partial sum at rho = 1.
    """

    regime: str
    equation: str
    k: float
    z0: complex
    coefficients: np.ndarray = field(repr=False)
    alpha: float | None = None
    tau_plus: float | None = None
    epsilon: float | None = None

    @property
    def m_max(self):
        return len(self.coefficients) - 1

    @property
    def theta0(self):
        return math.atan2(self.z0.imag, self.z0.real)

    def value_at(self, rho, theta):
        rho = np.asarray(rho, dtype=float)
        theta = np.asarray(theta, dtype=float)
        m = np.arange(len(self.coefficients))
        ang = np.cos(np.multiply.outer(theta - self.theta0, m))
        if self.equation == "laplace":
            rad = np.power.outer(rho, m)
        else:
            rad = bessel_j(m, np.multiply.outer(rho, np.full(len(m), self.k)))
        out = np.sum(self.coefficients * rad * ang, axis=-1)
        return out if out.ndim else out[()]

    def value_at_origin(self):
        return self.coefficients[0] if self.equation == "helmholtz" else 0.0

    def gradient_at_origin(self):
        """|grad phi| at the cage centre (only the m = 1 mode contributes)."""
        if len(self.coefficients) < 2:
            return 0.0
        c1 = self.coefficients[1]
        if self.equation == "laplace":
            return abs(c1)
        return abs(c1) * self.k / 2.0


def _truncate(coeff_fn, m_start=40, weight=None):
    """Accumulate coefficients until the tail is negligible at rho = 1.

    `weight(m)` is the size of the m-th basis function on the cage boundary
    (|J_m(k)| for Helmholtz series, whose raw coefficients can grow while
    the terms decay); tail smallness is judged on weighted coefficients.
    """
    w = weight or (lambda m: 1.0)

    def safe(c):
        return c if np.isfinite(c) else 0.0

    coeffs = [safe(coeff_fn(m)) for m in range(m_start + 1)]
    total = sum(abs(c) * w(m) for m, c in enumerate(coeffs))
    m = m_start
    quiet = 0
    while m < _M_CAP and quiet < 3:
        m += 1
        c = safe(coeff_fn(m))
        coeffs.append(c)
        size = abs(c) * w(m)
        total += size
        quiet = quiet + 1 if size <= _TAIL_REL * max(total, 1e-300) else 0
    return np.array(coeffs)


def laplace_thin_interior(z0, alpha, m_start=40) -> OuterSeries:
    """Interior Laplace solution under the thin-wire interface condition."""
    if alpha < 0.0:
        raise InvalidRegime("laplace_thin_interior requires alpha >= 0")
    r0 = abs(z0)
    if r0 <= 1.0:
        raise InvalidRegime("source must be exterior (|z0| > 1)")

    def coeff(m):
        if m == 0:
            return 0.0
        return 1.0 / (math.pi * (alpha + 2.0 * m) * r0 ** m)

    return OuterSeries("thin", "laplace", 0.0, complex(z0), _truncate(coeff, m_start),
                       alpha=alpha)


def laplace_thick_interior(z0, tau_plus, epsilon, m_start=40) -> OuterSeries:
    """Interior Laplace solution of the effective solid shell with leakage."""
    r0 = abs(z0)
    if r0 <= 1.0:
        raise InvalidRegime("source must be exterior (|z0| > 1)")

    def coeff(m):
        if m == 0:
            return 0.0
        return tau_plus * epsilon / (math.pi * r0 ** m)

    return OuterSeries("thick", "laplace", 0.0, complex(z0), _truncate(coeff, m_start),
                       tau_plus=tau_plus, epsilon=epsilon)


def _source_coefficients(k, r0):
    """e_m: modal strengths of the unit point source on the cage circle."""

    def e(m):
        h = hankel1(m, k * r0)
        return (0.25j if m == 0 else 0.5j) * h

    return e


def helmholtz_thin_interior(k, z0, alpha, m_start=40) -> OuterSeries:
    """Interior Helmholtz solution under the thin-wire interface condition."""
    if alpha < 0.0:
        raise InvalidRegime("helmholtz_thin_interior requires alpha >= 0")
    if k <= 0.0:
        raise InvalidRegime("helmholtz_thin_interior requires k > 0")
    r0 = abs(z0)
    if r0 <= 1.0:
        raise InvalidRegime("source must be exterior (|z0| > 1)")
    e = _source_coefficients(k, r0)

    def coeff(m):
        jh = bessel_j(m, k) * hankel1(m, k)
        if not np.isfinite(jh):
            return 0.0
        return e(m) / (1.0 + 0.5j * math.pi * alpha * jh)

    series = _truncate(coeff, m_start, weight=lambda m: abs(bessel_j(m, k)))
    return OuterSeries("thin", "helmholtz", k, complex(z0), series, alpha=alpha)


def _resonance_guard(k, epsilon, m_max):
    """Raise NearResonance when k sits within the guard band of a J_m zero."""
    for m in range(0, int(k) + 2):
        if m > m_max:
            break
        jm = bessel_j(m, k)
        guard = 1e-2 * max(1.0, abs(bessel_j(m, k, derivative=True)) * epsilon)
        if abs(jm) < guard:
            zeros = bessel_j_zeros(m, max(1, int(k / math.pi) + 2))
            k_zero = float(zeros[np.argmin(np.abs(zeros - k))])
            raise NearResonance(m, k_zero)


def helmholtz_thick_interior(k, z0, tau_plus, epsilon, m_start=40) -> OuterSeries:
    """Non-resonant thick-wire interior Helmholtz solution.

    Raises NearResonance when k is within the guard band of an interior
    resonance; the caller should switch to the resonance module there.
    """
    if k <= 0.0:
        raise InvalidRegime("helmholtz_thick_interior requires k > 0")
    r0 = abs(z0)
    if r0 <= 1.0:
        raise InvalidRegime("source must be exterior (|z0| > 1)")
    _resonance_guard(k, epsilon, m_start + 10)
    e = _source_coefficients(k, r0)

    def coeff(m):
        # k eps tau (Jm'/Jm - Hm'/Hm) e_m = -2i eps tau e_m / (pi Jm Hm)
        jh = bessel_j(m, k) * hankel1(m, k)
        if not np.isfinite(jh) or jh == 0.0:
            return 0.0
        return -2.0j * epsilon * tau_plus * e(m) / (math.pi * jh)

    series = _truncate(coeff, m_start, weight=lambda m: abs(bessel_j(m, k)))
    return OuterSeries("thick", "helmholtz", k, complex(z0), series,
                       tau_plus=tau_plus, epsilon=epsilon)


@dataclass(frozen=True)
class NeumannShellEstimate:
    """Leading interior behaviour of the perforated Neumann shell."""

    equation: str
    eps_lambda: float
    interior_constant: float | None  # Laplace: average of the exterior trace
    interior_scale: float            # size of the leading varying part
    z0: complex

    def exterior_boundary_value(self, theta):
        """Trace on the unit circle of the solid-shell exterior solution."""
        r0 = abs(self.z0)
        theta = np.asarray(theta, dtype=float) - math.atan2(self.z0.imag, self.z0.real)
        out = np.full(theta.shape, -math.log(r0) / (2.0 * math.pi))
        for m in range(1, 200):
            term = np.cos(m * theta) / (math.pi * m * r0 ** m)
            out = out + term
            if np.max(np.abs(term)) < 1e-16:
                break
        return out


def neumann_shell(equation, k, z0, eps_lambda) -> NeumannShellEstimate:
    """Interior estimate for the very-small-gap Neumann (perforated) shell.

    Laplace: the interior potential is constant at leading order, equal to
    the boundary average of the exterior solid-shell solution, with O(1/(eps
    lambda)) corrections controlling the interior gradient.  Helmholtz
    (non-resonant): the interior field itself is O(1/(eps lambda)).
    """
    if eps_lambda < 5.0:
        warnings.warn(
            f"eps*lambda = {eps_lambda:.3g} < 5: very-small-gap asymptotics dubious",
            RegimeWarning,
            stacklevel=2,
        )
    r0 = abs(z0)
    if r0 <= 1.0:
        raise InvalidRegime("source must be exterior (|z0| > 1)")
    scale = 1.0 / eps_lambda
    if equation == "laplace":
        const = -math.log(r0) / (2.0 * math.pi)
        return NeumannShellEstimate("laplace", eps_lambda, const, scale, complex(z0))
    return NeumannShellEstimate("helmholtz", eps_lambda, None, scale, complex(z0))
