"""Public cell-problem API: far-field constants and grid artifacts.

Dispatch policy per wire shape:

* slits (perpendicular / tangential): closed forms by conformal mapping;
  the tangential shape also has a finite-difference path used to validate
  the numeric solver against the closed forms.
* disks: lattice-sum multipole collocation (spectral) up to delta = 0.47,
  finite differences with Richardson extrapolation beyond (near-touching).
* squares: finite differences with Richardson extrapolation.

All constants are cached; sweeps and the resonance pipeline hit the same
values repeatedly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..errors import DomainError, NoConvergence, WindowTooClose
from ..geometry import DELTA_MAX, WireShape
from ..numerics import bracket_root
from . import closed, multipole
from .fd import StripFD, fd_profile_fit

__all__ = [
    "GridSpec",
    "FarFieldConstants",
    "CellSolution",
    "FitResult",
    "cell_dirichlet_analytic",
    "cell_dirichlet_numeric",
    "cell_neumann",
    "cell_dirichlet_tilde",
    "cell_neumann_higher",
    "dirichlet_constants",
    "neumann_lambda",
    "far_field_fit",
    "delta_for_tau",
    "gap_fraction_for_tau",
]

# empirically calibrated Richardson orders (see tests/test_cellsolve.py):
# Shortley-Weller boundaries converge at 2, slit tips at 1 (the square-root
# tip singularity dominates; finite-volume tip faces keep the constant small)
_FD_ORDER = {
    WireShape.DISK: 2.0,
    WireShape.SQUARE: 2.0,
    WireShape.TANGENTIAL_SEGMENT: 1.0,
}


@dataclass(frozen=True)
class GridSpec:
    """Resolution request for the numeric strip solvers."""

    n: int = 80          # S-resolution of the coarse grid (h = 1/n)
    n_max: float = 2.0   # strip truncation; far-field tail ~ exp(-2 pi n_max)
    refine: int = 2      # number of grids in the Richardson sequence
    order: float | None = None  # extrapolation order override
    tol: float = 2e-3    # NoConvergence if successive extrapolations move more


def _default_grid(shape: WireShape) -> GridSpec:
    if shape == WireShape.TANGENTIAL_SEGMENT:
        return GridSpec(n=40, refine=3)
    return GridSpec(n=80, refine=2)


@dataclass(frozen=True)
class FarFieldConstants:
    shape: WireShape
    delta: float
    sigma_plus: float | None = None
    sigma_minus: float | None = None
    tau_plus: float | None = None
    tau_minus: float | None = None
    lam: float | None = None
    sigma_tilde_minus: float | None = None
    tau_tilde_minus: float | None = None
    mu_tilde: float | None = None
    mu_hat: float | None = None
    mu_check: float | None = None
    a0: float | None = None
    method: str = ""


@dataclass
class CellSolution:
    """Grid samples of one strip solution (for dumps, figures and checks)."""

    N: np.ndarray = field(repr=False)
    S: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    h: float = 0.0
    n_max: float = 0.0
    shape: WireShape = WireShape.DISK
    delta: float = 0.0
    bc: str = "dirichlet"
    wire_model: int | None = None
    method: str = ""

    def interior_residual_bound(self):
        """Max 5-point Laplacian residual at regular interior nodes.

        Nodes adjacent to the wire (within 4h of its circumradius) and the
        strip ends are excluded; there the stencil is modified or the field
        is not smoothly sampled.
        """
        v = self.values
        lap = np.full_like(v, np.nan)
        lap[1:-1, :] = (
            v[2:, :] + v[:-2, :] + np.roll(v, 1, axis=1)[1:-1, :]
            + np.roll(v, -1, axis=1)[1:-1, :] - 4.0 * v[1:-1, :]
        ) / self.h ** 2
        NN, SS = np.meshgrid(self.N, self.S, indexing="ij")
        rr = np.sqrt(np.minimum(NN ** 2 + SS ** 2,
                                NN ** 2 + (np.abs(SS) - 1.0) ** 2))
        keep = (rr > self.delta + 4.0 * self.h) & np.isfinite(lap)
        keep &= np.abs(NN) < self.n_max - 2.0 * self.h
        return float(np.nanmax(np.abs(lap[keep])))

    def to_csv(self, path):
        NN, SS = np.meshgrid(self.N, self.S, indexing="ij")
        data = np.column_stack([NN.ravel(), SS.ravel(), self.values.ravel()])
        header = (
            f"shape={self.shape.value} delta={self.delta} bc={self.bc} "
            f"method={self.method}\nN,S,value"
        )
        np.savetxt(path, data, delimiter=",", header=header, fmt="%.12g")


@dataclass(frozen=True)
class FitResult:
    coefficients: tuple  # ascending powers of N
    residual: float

    @property
    def constant(self):
        return self.coefficients[0]

    @property
    def slope(self):
        return self.coefficients[1] if len(self.coefficients) > 1 else 0.0


def far_field_fit(solution: CellSolution, side="right", order=1, window=1.0):
    """Fit the S-averaged far-field profile by a polynomial in N.

    Raises WindowTooClose when the fit residual exceeds 1e-4 * max|values|,
    i.e. the window still sees the exponentially decaying near field.
    """
    prof = np.nanmean(solution.values, axis=1)
    if side == "right":
        mask = solution.N >= solution.n_max - window
    elif side == "left":
        mask = solution.N <= -solution.n_max + window
    else:
        raise DomainError("side must be 'right' or 'left'")
    if not np.any(mask):
        raise DomainError("empty fit window")
    coeffs, resid = fd_profile_fit(solution.N[mask], prof[mask], order)
    scale = float(np.nanmax(np.abs(solution.values)))
    if resid > 1e-4 * max(scale, 1e-300):
        raise WindowTooClose(
            f"fit residual {resid:.2e} exceeds 1e-4 * max|values| = {1e-4 * scale:.2e}"
        )
    return FitResult(tuple(float(c) for c in coeffs), float(resid))


def _grid_sequence(grid: GridSpec):
    return [grid.n * 2 ** k for k in range(grid.refine)]


def _richardson(values, order, tol, what):
    """Extrapolate a grid sequence with the given order.

    With three or more grids, convergence is judged by the drift between
    successive extrapolated values; with two, by the extrapolation step
    itself (the error estimate of the finest grid).
    """
    if len(values) == 1:
        return values[0]
    factor = 2.0 ** order - 1.0
    extrapolated = [
        values[i + 1] + (values[i + 1] - values[i]) / factor
        for i in range(len(values) - 1)
    ]
    if len(extrapolated) >= 2:
        drift = abs(extrapolated[-1] - extrapolated[-2])
    else:
        drift = abs(extrapolated[-1] - values[-1])
    if drift > tol:
        raise NoConvergence(
            f"{what}: extrapolation drift {drift:.2e} exceeds tol {tol:.1e}"
        )
    return extrapolated[-1]


def _align_slit_grid(n, delta):
    """Smallest n' >= n with a (node-centred) S node exactly at the slit tip."""
    frac = (delta % 1.0)
    den = 1
    # delta is a float; align to within 1e-12 by rational snapping up to 1/1000
    from fractions import Fraction

    f = Fraction(frac).limit_denominator(1000)
    den = f.denominator
    return int(math.ceil(n / den) * den)


def _multipole_cell_solution(sol, shape, delta, bc, grid: GridSpec, method):
    n = min(grid.n, 48)
    h = 1.0 / n
    N = -grid.n_max + (np.arange(int(2 * grid.n_max * n)) + 0.5) * h
    S = -0.5 + np.arange(n) * h
    NN, SS = np.meshgrid(N, S, indexing="ij")
    Z = NN + 1j * SS
    vals = sol.value(Z)
    vals[NN ** 2 + SS ** 2 < delta ** 2] = np.nan
    return CellSolution(N=N, S=S, values=vals, h=h, n_max=grid.n_max,
                        shape=shape, delta=delta, bc=bc, method=method)


def _fd_cell_solution(fd: StripFD, shape, delta, bc, method):
    return CellSolution(N=fd.N, S=fd.S, values=fd.values, h=fd.h,
                        n_max=fd.n_max, shape=shape, delta=delta, bc=bc,
                        method=method)


def cell_dirichlet_analytic(shape: WireShape, delta) -> FarFieldConstants:
    """Closed-form Dirichlet constants for the two slit orientations."""
    if shape == WireShape.PERPENDICULAR_SEGMENT:
        sigma, tau = closed.perpendicular_sigma_tau(delta)
    elif shape == WireShape.TANGENTIAL_SEGMENT:
        sigma, tau = closed.tangential_sigma_tau(delta)
    else:
        raise DomainError("analytic Dirichlet constants exist only for slits")
    return FarFieldConstants(
        shape=shape, delta=delta, sigma_plus=sigma, sigma_minus=sigma,
        tau_plus=tau, tau_minus=tau, a0=closed.a0_constant(shape),
        method="conformal",
    )


@lru_cache(maxsize=None)
def _dirichlet_numeric_cached(shape, delta, grid: GridSpec):
    if shape == WireShape.PERPENDICULAR_SEGMENT:
        raise DomainError("perpendicular slit: use cell_dirichlet_analytic")
    if shape == WireShape.DISK and delta <= multipole.MULTIPOLE_DELTA_LIMIT:
        sol = multipole.solve_dirichlet(delta)
        ref = multipole.solve_dirichlet(delta, n_terms=sol.n_terms + 16)
        drift = abs(sol.right_constant - ref.right_constant)
        if drift > 1e-8:
            raise NoConvergence(f"multipole sigma drift {drift:.2e}")
        cs = _multipole_cell_solution(ref, shape, delta, "dirichlet", grid,
                                      "multipole")
        sigma, tau = ref.right_constant, ref.left_constant
        return cs, FarFieldConstants(
            shape=shape, delta=delta, sigma_plus=sigma, sigma_minus=sigma,
            tau_plus=tau, tau_minus=tau, a0=closed.a0_constant(shape),
            method="multipole",
        )

    order = grid.order or _FD_ORDER[shape]
    sigmas, taus, fds = [], [], []
    for n in _grid_sequence(grid):
        if shape == WireShape.TANGENTIAL_SEGMENT:
            n = _align_slit_grid(n, delta)
        fd = StripFD(shape, delta, "dirichlet", slope_left=0.0, slope_right=1.0,
                     n=n, n_max=grid.n_max)
        s, t = fd.dirichlet_constants()
        sigmas.append(s)
        taus.append(t)
        fds.append(fd)
    sigma = _richardson(sigmas, order, grid.tol, f"sigma({shape.value})")
    tau = _richardson(taus, order, grid.tol, f"tau({shape.value})")
    cs = _fd_cell_solution(fds[-1], shape, delta, "dirichlet", "fd")
    return cs, FarFieldConstants(
        shape=shape, delta=delta, sigma_plus=sigma, sigma_minus=sigma,
        tau_plus=tau, tau_minus=tau, a0=closed.a0_constant(shape), method="fd",
    )


def cell_dirichlet_numeric(shape: WireShape, delta, grid: GridSpec | None = None):
    """Numeric Dirichlet cell solve; returns (CellSolution, FarFieldConstants).

    Supported shapes: disk, square, and (for validating the solver against
    the closed forms) the tangential slit.
    """
    if delta <= 0.0 or delta > DELTA_MAX[shape]:
        raise DomainError(f"delta = {delta} outside (0, {DELTA_MAX[shape]}]")
    return _dirichlet_numeric_cached(shape, float(delta), grid or _default_grid(shape))


@lru_cache(maxsize=None)
def _neumann_numeric_cached(shape, delta, grid: GridSpec):
    if shape == WireShape.DISK:
        if delta > multipole.MULTIPOLE_DELTA_LIMIT:
            raise DomainError("disk Neumann solver limited to delta <= 0.47")
        sol, lam = multipole.solve_neumann(delta)
        _, lam_ref = multipole.solve_neumann(delta, n_terms=sol.n_terms + 16)
        if abs(lam - lam_ref) > 1e-8:
            raise NoConvergence(f"multipole lambda drift {abs(lam - lam_ref):.2e}")
        cs = _multipole_cell_solution(sol, shape, delta, "neumann", grid,
                                      "multipole")
        return cs, float(lam_ref)

    order = grid.order or _FD_ORDER[shape]
    lams, fds = [], []
    for n in _grid_sequence(grid):
        if shape == WireShape.TANGENTIAL_SEGMENT:
            n = _align_slit_grid(n, delta)
            fd = StripFD(shape, delta, "neumann", slope_left=1.0, slope_right=1.0,
                         n=n, n_max=grid.n_max)
        else:
            # square: snap the half-width to grid faces and interpolate
            h = 1.0 / n
            w = delta / math.sqrt(2.0)
            k = int(math.floor(w / h))
            lam_pair = []
            for w_snap in (k * h, (k + 1) * h):
                f = StripFD(WireShape.SQUARE, delta, "neumann", slope_left=1.0,
                            slope_right=1.0, n=n, n_max=grid.n_max,
                            snap_half_width=w_snap)
                lam_pair.append(f.neumann_lambda())
            frac = (w - k * h) / h
            lams.append((1.0 - frac) * lam_pair[0] + frac * lam_pair[1])
            fds.append(f)
            continue
        lams.append(fd.neumann_lambda())
        fds.append(fd)
    lam = _richardson(lams, order, grid.tol, f"lambda({shape.value})")
    cs = _fd_cell_solution(fds[-1], shape, delta, "neumann", "fd")
    return cs, float(lam)


def cell_neumann(shape: WireShape, delta, grid: GridSpec | None = None,
                 force_numeric=False):
    """Neumann (blockage) cell problem; returns (CellSolution | None, lambda).

    Perpendicular slits do not block at all (lambda = 0, no solve);
    tangential slits default to the closed form unless force_numeric is set.
    """
    if shape == WireShape.PERPENDICULAR_SEGMENT:
        return None, 0.0
    if shape == WireShape.TANGENTIAL_SEGMENT and not force_numeric:
        return None, closed.tangential_lambda(delta)
    if delta <= 0.0 or delta >= DELTA_MAX[shape]:
        raise DomainError(f"delta = {delta} outside (0, {DELTA_MAX[shape]})")
    return _neumann_numeric_cached(shape, float(delta), grid or _default_grid(shape))


@lru_cache(maxsize=None)
def _tilde_cached(delta, wire_model):
    sp_, tp_, _ = multipole.solve_dirichlet_tilde(delta, model=wire_model,
                                                  side="plus")
    return float(sp_), float(tp_)


def cell_dirichlet_tilde(shape: WireShape, delta, wire_model=1,
                         grid: GridSpec | None = None):
    """Curvature-correction constant sigma_tilde (= both sides, disk).

    Model 1 includes the wire-shape distortion of the curved frame through
    the boundary perturbation; Model 2 keeps the wire fixed in curvilinear
    coordinates, so the perturbation term is absent.
    """
    if shape != WireShape.DISK:
        raise NotImplementedError("tilde cell problem implemented for disks")
    if delta > multipole.MULTIPOLE_DELTA_LIMIT:
        raise DomainError("tilde solver limited to delta <= 0.47")
    return _tilde_cached(float(delta), int(wire_model))[0]


def cell_neumann_higher(shape: WireShape, delta, wire_model=1):
    """Higher-order Neumann constants (mu_tilde, mu_hat, mu_check)."""
    if shape == WireShape.TANGENTIAL_SEGMENT and int(wire_model) == 2:
        return 0.0, 0.0, 0.0
    if shape == WireShape.DISK:
        if delta > multipole.MULTIPOLE_DELTA_LIMIT:
            raise DomainError("disk mu solver limited to delta <= 0.47")
        return multipole.neumann_mu_constants(float(delta), model=int(wire_model))
    if shape in (WireShape.PERPENDICULAR_SEGMENT, WireShape.TANGENTIAL_SEGMENT):
        raise NotImplementedError(
            "higher-order Neumann constants: only tangential Model 2 is exact"
        )
    raise NotImplementedError("square higher-order Neumann constants not needed")


def dirichlet_constants(shape: WireShape, delta,
                        grid: GridSpec | None = None) -> FarFieldConstants:
    """Dirichlet far-field constants by the best available method."""
    if shape in (WireShape.PERPENDICULAR_SEGMENT, WireShape.TANGENTIAL_SEGMENT):
        return cell_dirichlet_analytic(shape, delta)
    return cell_dirichlet_numeric(shape, delta, grid)[1]


def neumann_lambda(shape: WireShape, delta, grid: GridSpec | None = None) -> float:
    return cell_neumann(shape, delta, grid)[1]


def delta_for_tau(shape: WireShape, tau_target, bracket=None,
                  grid: GridSpec | None = None):
    """Solve tau_plus(delta) = tau_target for delta (tau decreases in delta)."""
    if bracket is None:
        hi = DELTA_MAX[shape]
        bracket = (0.05, 0.95 * hi if math.isfinite(hi) else 3.0)

    def f(d):
        return dirichlet_constants(shape, d, grid).tau_plus - tau_target

    return bracket_root(f, *bracket, xtol=1e-6)


def gap_fraction_for_tau(shape: WireShape, tau_target=0.01,
                         grid: GridSpec | None = None):
    """(delta*, gap fraction) at which tau_plus reaches tau_target.

    The gap fraction is the free fraction of the curve per cell: 1 - 2 delta
    for disks and tangential slits, 1 - sqrt(2) delta for squares, and 1 for
    perpendicular slits (which never block the curve).
    """
    d = delta_for_tau(shape, tau_target, grid=grid)
    if shape == WireShape.SQUARE:
        return d, 1.0 - math.sqrt(2.0) * d
    if shape == WireShape.PERPENDICULAR_SEGMENT:
        return d, 1.0
    return d, 1.0 - 2.0 * d
