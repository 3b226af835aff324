"""Shared numerical kernels: cylinder functions, least squares, quadrature, roots.

scipy does the heavy lifting; these wrappers pin down domains, error
signalling and determinism so the rest of the package relies on a single
contract.  All kernels are stateless and side-effect free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, special
from scipy.optimize import brentq

from .errors import DomainError, NoConvergence, RankDeficient

__all__ = [
    "bessel_j",
    "bessel_y",
    "hankel1",
    "bessel_j_zeros",
    "bessel_jp_zeros",
    "LstsqResult",
    "lstsq",
    "quad_1d",
    "quad_circle",
    "quad_disk",
    "bracket_root",
]


def bessel_j(m, x, derivative=False):
    """J_m(x) (or J_m'(x)) for integer order m >= 0 and real x >= 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("bessel_j requires x >= 0")
    out = special.jvp(m, x, 1) if derivative else special.jv(m, x)
    return out if out.ndim else float(out)


def bessel_y(m, x, derivative=False):
    """Y_m(x) (or Y_m'(x)) for integer order m >= 0 and real x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("bessel_y requires x > 0")
    out = special.yvp(m, x, 1) if derivative else special.yv(m, x)
    return out if out.ndim else float(out)


def hankel1(m, x, derivative=False):
    """H_m^(1)(x) (or its derivative) for integer order m >= 0 and real x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("hankel1 requires x > 0")
    out = special.h1vp(m, x, 1) if derivative else special.hankel1(m, x)
    return out if out.ndim else complex(out)


def bessel_j_zeros(m, count):
    """First `count` positive zeros of J_m."""
    return special.jn_zeros(m, count)


def bessel_jp_zeros(m, count):
    """First `count` positive zeros of J_m'."""
    return special.jnp_zeros(m, count)


@dataclass(frozen=True)
class LstsqResult:
    x: np.ndarray
    residual_norm: float
    rank: int
    singular_values: np.ndarray

    @property
    def cond(self):
        s = self.singular_values
        if s.size == 0 or s[-1] == 0.0:
            return np.inf
        return float(s[0] / s[-1])


def lstsq(A, b, rcond=1e-13, strict=True):
    """Minimise ||A x - b||_2 by SVD.

    strict=True raises RankDeficient (with the effective rank) when columns
    are numerically dependent at the given rcond; strict=False returns the
    minimum-norm solution, which is the standard regularisation for
    ill-conditioned collocation bases.
    """
    A = np.asarray(A)
    b = np.asarray(b)
    if A.shape[0] < A.shape[1]:
        raise DomainError("lstsq requires rows >= cols")
    x, _, rank, sv = np.linalg.lstsq(A, b, rcond=rcond)
    if strict and rank < A.shape[1]:
        raise RankDeficient(rank, A.shape[1])
    residual = float(np.linalg.norm(A @ x - b))
    return LstsqResult(x=x, residual_norm=residual, rank=int(rank), singular_values=sv)


def _quad_real(f, a, b, tol):
    val, err = integrate.quad(f, a, b, epsabs=tol, epsrel=0.0, limit=400)
    if err > max(10.0 * tol, 1e-13 * abs(val)):
        raise NoConvergence(f"quad_1d error estimate {err:.2e} exceeds tol {tol:.2e}")
    return val


def quad_1d(f, a, b, tol=1e-10):
    """Adaptive integral of f over [a, b] to absolute tolerance tol.

    f may return real or complex values.
    """
    probe = np.asarray(f(0.5 * (a + b)))
    if np.iscomplexobj(probe):
        re = _quad_real(lambda t: f(t).real, a, b, tol)
        im = _quad_real(lambda t: f(t).imag, a, b, tol)
        return re + 1j * im
    return _quad_real(f, a, b, tol)


def quad_circle(f, radius=1.0, tol=1e-10, n0=32, nmax=65536):
    """Integral of f(theta) over [0, 2pi) weighted by arc length radius*dtheta.

    Trapezoid rule with doubling; spectrally accurate for smooth periodic f.
    """
    prev = None
    n = n0
    while n <= nmax:
        theta = 2.0 * np.pi * np.arange(n) / n
        val = np.sum(f(theta)) * (2.0 * np.pi / n) * radius
        if prev is not None and abs(val - prev) <= tol:
            return val
        prev = val
        n *= 2
    raise NoConvergence("quad_circle did not converge")


def quad_disk(f, radius=1.0, tol=1e-10, n0=16, nmax=4096):
    """Integral of f(x, y) over the disk of given radius centred at 0.

    Gauss-Legendre in the radial direction crossed with a periodic trapezoid
    rule in angle, refined by doubling until two levels agree within tol.
    """
    prev = None
    n = n0
    while n <= nmax:
        nodes, weights = np.polynomial.legendre.leggauss(n)
        rho = 0.5 * radius * (nodes + 1.0)
        wr = 0.5 * radius * weights
        ntheta = 2 * n
        theta = 2.0 * np.pi * np.arange(ntheta) / ntheta
        R, T = np.meshgrid(rho, theta, indexing="ij")
        vals = f(R * np.cos(T), R * np.sin(T))
        val = np.sum(vals * (R * wr[:, None])) * (2.0 * np.pi / ntheta)
        if prev is not None and abs(val - prev) <= tol:
            return val
        prev = val
        n *= 2
    raise NoConvergence("quad_disk did not converge")


def bracket_root(f, a, b, xtol=1e-12, maxiter=200):
    """Root of f in the bracket [a, b] (Brent); DomainError if not bracketed."""
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise DomainError(f"root not bracketed on [{a}, {b}]: f ends {fa:.3g}, {fb:.3g}")
    return brentq(f, a, b, xtol=xtol, maxiter=maxiter)
