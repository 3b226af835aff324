"""Reference solver for the true many-wire problem (disk wires).

The field is expanded in radially symmetric solutions centred on the wires
(log and inverse powers for Laplace, outgoing Hankel functions for
Helmholtz) plus the free field of the point source, and the coefficients
are fit by least squares to the homogeneous Dirichlet condition at
collocation points on the wire boundaries.  Columns are normalised to unit
collocation norm before the solve; the raw columns span many orders of
magnitude and would defeat the factorisation.

For a rotationally uniform circle cage the collocation matrix is exactly
block-circulant in the wire index (the basis lives in each wire's local
frame), so an FFT over that index decouples the least-squares problem into
M independent blocks; wavenumber sweeps become cheap.  Square cages use the
dense path.

Laplace far field: the source contributes -(1/2 pi) log|z|, the wire log
strengths are constrained to sum to zero (zero net charge on the cage), and
one free additive constant is part of the basis.  Helmholtz radiation holds
by construction of the Hankel basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .errors import (
    DomainError,
    IllConditioned,
    InsideWire,
    NearSingularBasis,
    WireOverlap,
)
from .geometry import CageGeometry, Curve, WireShape

__all__ = [
    "DiscreteSolution",
    "solve_laplace",
    "solve_helmholtz",
    "evaluate",
    "evaluate_gradient",
    "greens_value",
    "boundary_residual",
]

_RCOND = 1e-13
_COND_LIMIT = 1e15


def _require_disks(geom: CageGeometry):
    if not geom.is_empty and geom.config.wire_shape != WireShape.DISK:
        raise DomainError("the discrete solver supports disk wires only")


def _collocation_points(geom: CageGeometry, n_per_wire, offset=0.5):
    """n_per_wire points per wire boundary, same local pattern on every wire."""
    ang = 2.0 * math.pi * (np.arange(n_per_wire) + offset) / n_per_wire
    local = geom.wire_radius * np.exp(1j * (geom.normal_angles[:, None] + ang[None, :]))
    return geom.centers[:, None] + local  # (M, n_per_wire)


def _laplace_free(z, z0):
    return -np.log(np.abs(np.asarray(z, dtype=complex) - z0)) / (2.0 * math.pi)


def _helmholtz_free(z, z0, k):
    return 0.25j * numerics.hankel1(0, k * np.abs(np.asarray(z, dtype=complex) - z0))


def _hankel_signed(n, x):
    """H_n^(1) for any integer order (H_-n = (-1)^n H_n)."""
    h = numerics.hankel1(abs(n), x)
    return h if n >= 0 or n % 2 == 0 else -h


def _laplace_block(pts, center, normal_angle, P):
    """Real basis columns of one wire at the given points: log, Re/Im w^-n."""
    w = np.exp(-1j * normal_angle) * (np.asarray(pts, dtype=complex) - center)
    cols = [np.log(np.abs(w))]
    wn = np.ones_like(w)
    for _ in range(P):
        wn = wn / w
        cols.append(wn.real.copy())
        cols.append(wn.imag.copy())
    return np.column_stack(cols)


def _helmholtz_block(pts, center, normal_angle, P, k, guard=False):
    """Complex basis columns H_n(k r) (w/|w|)^n, n = -P..P, local frame.

    guard=True (assembly) rejects k*r below the evaluation guard; without it
    points at the wire centre are clamped (they are masked by the caller).
    """
    d = np.asarray(pts, dtype=complex) - center
    r = np.abs(d)
    if guard and np.any(k * r < 1e-8):
        raise NearSingularBasis("k*r below evaluation guard")
    r = np.maximum(r, 1e-290)
    phase = np.exp(-1j * normal_angle) * d / r
    phase[d == 0.0] = 1.0
    cols = [_hankel_signed(n, k * r) * phase ** n for n in range(-P, P + 1)]
    return np.column_stack(cols)


@dataclass
class DiscreteSolution:
    equation: str
    k: float
    geometry: CageGeometry | None
    z0: complex
    strength: float
    P: int
    n_colloc: int
    coeffs: np.ndarray = field(repr=False)  # (M, 2P+1); real for Laplace
    constant: float = 0.0  # Laplace additive constant
    residual_norm: float = 0.0
    cond_estimate: float = 0.0

    @property
    def M(self):
        return 0 if self.geometry is None else self.geometry.M

    # --- evaluation -------------------------------------------------------
    def free_field(self, z):
        if self.equation == "laplace":
            return self.strength * _laplace_free(z, self.z0)
        return self.strength * _helmholtz_free(z, self.z0, self.k)

    def inside_wire(self, z):
        z_arr = np.asarray(z, dtype=complex)
        if self.M == 0:
            return np.zeros(z_arr.shape, dtype=bool)
        d = np.abs(z_arr.reshape(-1)[:, None] - self.geometry.centers[None, :])
        return np.any(d < self.geometry.wire_radius, axis=1).reshape(z_arr.shape)

    def _wire_field(self, z):
        z_arr = np.asarray(z, dtype=complex)
        out = np.zeros(z_arr.shape, dtype=complex)
        geom = self.geometry
        # evaluation points inside wires are masked afterwards; the basis
        # singularities there are expected
        with np.errstate(divide="ignore", invalid="ignore"):
            for j in range(self.M):
                if self.equation == "laplace":
                    block = _laplace_block(z_arr.ravel(), geom.centers[j],
                                           geom.normal_angles[j], self.P)
                else:
                    block = _helmholtz_block(z_arr.ravel(), geom.centers[j],
                                             geom.normal_angles[j], self.P, self.k)
                out += (block @ self.coeffs[j]).reshape(z_arr.shape)
        return out

    def value(self, z, allow_inside=False):
        """phi(z); NaN inside wires when allow_inside, else InsideWire."""
        z_arr = np.asarray(z, dtype=complex)
        inside = self.inside_wire(z_arr)
        if np.any(inside) and not allow_inside:
            raise InsideWire("evaluation point inside a wire")
        out = self.free_field(z_arr) + self._wire_field(z_arr)
        if self.equation == "laplace":
            out = out.real + self.constant
            nan = np.nan
        else:
            nan = complex(np.nan, np.nan)
        if np.any(inside):
            out = np.where(inside, nan, out)
        return out if out.ndim else out[()]

    def _analytic_derivative(self, z):
        """For Laplace: F'(z) of the analytic completion (phi = Re F)."""
        z = np.asarray(z, dtype=complex)
        out = -self.strength / (2.0 * math.pi) / (z - self.z0)
        geom = self.geometry
        for j in range(self.M):
            rot = np.exp(-1j * geom.normal_angles[j])
            w = rot * (z - geom.centers[j])
            a = self.coeffs[j].real
            out = out + a[0] / (z - geom.centers[j])
            wn = 1.0 / w
            for n in range(1, self.P + 1):
                # Re(w^-n) -> f = w^-n, Im(w^-n) -> f = -i w^-n
                c = a[2 * n - 1] - 1j * a[2 * n]
                out = out - n * c * wn / w * rot
                wn = wn / w
        return out

    def _ladder(self, z, sign):
        """(d/dx + i sign d/dy) phi for Helmholtz."""
        z = np.asarray(z, dtype=complex)
        k = self.k
        d0 = z - self.z0
        u0 = (d0 / np.abs(d0)) ** sign
        out = -self.strength * 0.25j * k * numerics.hankel1(1, k * np.abs(d0)) * u0
        geom = self.geometry
        for j in range(self.M):
            theta = geom.normal_angles[j]
            dj = z - geom.centers[j]
            r = np.abs(dj)
            phase = np.exp(-1j * theta) * dj / r
            for idx, n in enumerate(range(-self.P, self.P + 1)):
                c = self.coeffs[j][idx]
                if c == 0.0:
                    continue
                m = n + sign
                term = c * k * _hankel_signed(m, k * r) * phase ** m
                # local ladders: (dx~ + i dy~) u_n = -k u_{n+1},
                #                (dx~ - i dy~) u_n = +k u_{n-1}
                out = out + (-term if sign > 0 else term) * np.exp(1j * sign * theta)
        return out

    def gradient(self, z):
        """(d/dx, d/dy) of the field; a complex pair for Helmholtz."""
        z_arr = np.asarray(z, dtype=complex)
        if np.any(self.inside_wire(z_arr)):
            raise InsideWire("evaluation point inside a wire")
        if self.equation == "laplace":
            fp = self._analytic_derivative(z_arr)
            gx, gy = fp.real, -fp.imag
        else:
            dp = self._ladder(z_arr, +1)
            dm = self._ladder(z_arr, -1)
            gx, gy = 0.5 * (dp + dm), (dp - dm) / 2.0j
        return np.stack([np.asarray(gx), np.asarray(gy)], axis=-1)

    def boundary_residual(self, factor=4):
        """(max, rms) of |phi| over factor*C interleaved check points per wire."""
        if self.M == 0:
            return 0.0, 0.0
        pts = _collocation_points(self.geometry, factor * self.n_colloc,
                                  offset=0.25).ravel()
        vals = self.free_field(pts) + self._wire_field(pts)
        if self.equation == "laplace":
            vals = vals.real + self.constant
        vals = np.abs(vals)
        return float(np.max(vals)), float(np.sqrt(np.mean(vals ** 2)))


def evaluate(sol: DiscreteSolution, z, allow_inside=False):
    return sol.value(z, allow_inside=allow_inside)


def evaluate_gradient(sol: DiscreteSolution, z):
    return sol.gradient(z)


def greens_value(sol: DiscreteSolution, z):
    """Field minus its additive constant (the symmetric Green function)."""
    return sol.value(z) - (sol.constant if sol.equation == "laplace" else 0.0)


def boundary_residual(sol: DiscreteSolution, factor=4):
    return sol.boundary_residual(factor=factor)


# --- solvers ---------------------------------------------------------------

def _solve_blocks(blocks, rhs_blocks, drop_col0=False, constant_col=False):
    """Block-circulant least squares via FFT over the wire index.

    blocks[d] is wire 0's basis evaluated at wire d's collocation points.
    The global constant column (all ones) transforms to M*ones in the q = 0
    block only; the q = 0 component of a dropped column enforces a zero sum
    of that coefficient over the wires.
    """
    M, C, K = blocks.shape
    col_norm = np.sqrt(np.sum(np.abs(blocks) ** 2, axis=(0, 1)))
    col_norm[col_norm == 0.0] = 1.0
    A_hat = np.fft.fft(blocks / col_norm[None, None, :], axis=0)
    b_hat = np.fft.fft(rhs_blocks, axis=0)
    x = np.zeros((M, K), dtype=complex)
    constant = 0.0
    cond = 0.0
    resid2 = 0.0
    for q in range(M):
        Aq, bq = A_hat[q], b_hat[q]
        if q == 0:
            keep = list(range(1, K)) if drop_col0 else list(range(K))
            Aq = Aq[:, keep]
            if constant_col:
                cnorm = float(M) * math.sqrt(C)
                Aq = np.hstack([Aq, np.full((C, 1), M / cnorm)])
            res = numerics.lstsq(Aq, bq, rcond=_RCOND, strict=False)
            sol_vec = res.x
            if constant_col:
                constant = complex(sol_vec[-1]) / cnorm
                sol_vec = sol_vec[:-1]
            xq = np.zeros(K, dtype=complex)
            xq[keep] = sol_vec
        else:
            res = numerics.lstsq(Aq, bq, rcond=_RCOND, strict=False)
            xq = res.x
        x[q] = xq
        if np.isfinite(res.cond):
            cond = max(cond, res.cond)
        resid2 += res.residual_norm ** 2
    coeffs = np.fft.ifft(x, axis=0) / col_norm[None, :]
    return coeffs, constant, math.sqrt(resid2 / M), cond


def _solve_dense(A, b):
    col_norm = np.linalg.norm(A, axis=0)
    col_norm[col_norm == 0.0] = 1.0
    res = numerics.lstsq(A / col_norm, b, rcond=_RCOND, strict=False)
    return res.x / col_norm, res.residual_norm, res.cond


def _check_counts(geom, P, C):
    if C < 2 * P + 1:
        raise DomainError("need at least 2P+1 collocation points per wire")
    if geom.wire_radius <= 0.0:
        raise WireOverlap("non-positive wire radius")


def _is_uniform_circle(geom: CageGeometry):
    return geom.config.curve == Curve.UNIT_CIRCLE


def solve_laplace(geom: CageGeometry | None, z0, P=10, C=None, strength=1.0,
                  force_dense=False) -> DiscreteSolution:
    """Grounded-cage electrostatic solve for a unit point source at z0."""
    z0 = complex(z0)
    if geom is None or geom.is_empty:
        return DiscreteSolution("laplace", 0.0, geom, z0, strength, P, 0,
                                np.zeros((0, 2 * P + 1)))
    _require_disks(geom)
    C = C or 3 * (2 * P + 1)
    _check_counts(geom, P, C)
    pts = _collocation_points(geom, C)
    M, K = geom.M, 2 * P + 1
    rhs = -strength * _laplace_free(pts, z0)

    if _is_uniform_circle(geom) and not force_dense:
        blocks = np.empty((M, C, K))
        for d in range(M):
            blocks[d] = _laplace_block(pts[d], geom.centers[0],
                                       geom.normal_angles[0], P)
        coeffs, const, resid, cond = _solve_blocks(
            blocks.astype(complex), rhs.astype(complex),
            drop_col0=True, constant_col=True)
        coeffs = coeffs.real
        const = float(np.real(const))
    else:
        last_log = _laplace_block(pts.ravel(), geom.centers[M - 1],
                                  geom.normal_angles[M - 1], P)[:, 0]
        cols = []
        for j in range(M):
            block = _laplace_block(pts.ravel(), geom.centers[j],
                                   geom.normal_angles[j], P)
            if j < M - 1:
                block[:, 0] -= last_log
            else:
                block = block[:, 1:]
            cols.append(block)
        cols.append(np.ones((pts.size, 1)))
        A = np.hstack(cols)
        xx, resid, cond = _solve_dense(A, rhs.ravel())
        coeffs = np.zeros((M, K))
        pos = 0
        for j in range(M - 1):
            coeffs[j] = xx[pos:pos + K]
            pos += K
        coeffs[M - 1, 1:] = xx[pos:pos + K - 1]
        pos += K - 1
        coeffs[M - 1, 0] = -np.sum(coeffs[:M - 1, 0])
        const = float(xx[pos])

    if cond > _COND_LIMIT:
        raise IllConditioned(cond)
    return DiscreteSolution("laplace", 0.0, geom, z0, strength, P, C, coeffs,
                            constant=const, residual_norm=resid,
                            cond_estimate=cond)


def solve_helmholtz(geom: CageGeometry | None, k, z0, P=10, C=None, strength=1.0,
                    force_dense=False) -> DiscreteSolution:
    """Time-harmonic (Dirichlet) solve for a unit point source at z0."""
    if k <= 0.0:
        raise DomainError("wavenumber k must be positive")
    z0 = complex(z0)
    if geom is None or geom.is_empty:
        return DiscreteSolution("helmholtz", float(k), geom, z0, strength, P, 0,
                                np.zeros((0, 2 * P + 1), dtype=complex))
    _require_disks(geom)
    C = C or 3 * (2 * P + 1)
    _check_counts(geom, P, C)
    pts = _collocation_points(geom, C)
    M, K = geom.M, 2 * P + 1
    rhs = -strength * _helmholtz_free(pts, z0, k)

    if _is_uniform_circle(geom) and not force_dense:
        blocks = np.empty((M, C, K), dtype=complex)
        for d in range(M):
            blocks[d] = _helmholtz_block(pts[d], geom.centers[0],
                                         geom.normal_angles[0], P, k, guard=True)
        coeffs, _, resid, cond = _solve_blocks(blocks, rhs)
    else:
        A = np.hstack([
            _helmholtz_block(pts.ravel(), geom.centers[j],
                             geom.normal_angles[j], P, k, guard=True)
            for j in range(M)
        ])
        xx, resid, cond = _solve_dense(A, rhs.ravel())
        coeffs = xx.reshape(M, K)

    if cond > _COND_LIMIT:
        raise IllConditioned(cond)
    return DiscreteSolution("helmholtz", float(k), geom, z0, strength, P, C,
                            coeffs, residual_norm=resid, cond_estimate=cond)
