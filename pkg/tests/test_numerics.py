"""Kernel tests with independent oracles (power series, continued fractions,
high-precision references, normal equations)."""

import math

import numpy as np
import pytest

from cagecalc import numerics
from cagecalc.errors import DomainError, NoConvergence, RankDeficient


def j0_series(x, terms=40):
    """Power-series J0, the reference for the zero-finding oracle."""
    total, term = 0.0, 1.0
    for kk in range(terms):
        if kk > 0:
            term *= -(x / 2.0) ** 2 / kk ** 2
        total += term
    return total


def test_bessel_trivial_values():
    assert numerics.bessel_j(0, 0.0) == 1.0
    assert numerics.bessel_j(1, 0.0) == 0.0


def test_first_j0_zero_against_series_bisection():
    lo, hi = 2.0, 3.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if j0_series(lo) * j0_series(mid) <= 0.0:
            hi = mid
        else:
            lo = mid
    zero_oracle = 0.5 * (lo + hi)
    assert abs(zero_oracle - 2.404826) < 1e-6
    assert abs(numerics.bessel_j_zeros(0, 1)[0] - zero_oracle) < 1e-12


def test_wronskian_identity():
    rng = np.random.default_rng(3)
    for _ in range(50):
        m = int(rng.integers(0, 10))
        x = float(rng.uniform(0.3, 40.0))
        w = (numerics.bessel_j(m, x) * numerics.bessel_y(m, x, derivative=True)
             - numerics.bessel_j(m, x, derivative=True) * numerics.bessel_y(m, x))
        assert abs(w - 2.0 / (math.pi * x)) < 1e-10


def test_three_term_recurrence():
    rng = np.random.default_rng(5)
    for m in range(1, 16):
        x = rng.uniform(0.5, 20.0, 5)
        lhs = numerics.bessel_j(m - 1, x) + numerics.bessel_j(m + 1, x)
        rhs = 2 * m / x * numerics.bessel_j(m, x)
        assert np.max(np.abs(lhs - rhs)) < 1e-9


def test_hankel_components_and_modulus():
    x = np.array([0.7, 2.3, 11.0])
    for m in (0, 1, 5):
        h = numerics.hankel1(m, x)
        assert np.allclose(h.real, numerics.bessel_j(m, x), atol=1e-12, rtol=0)
        assert np.allclose(h.imag, numerics.bessel_y(m, x), atol=1e-12, rtol=0)
        assert np.allclose(
            np.abs(h),
            np.hypot(numerics.bessel_j(m, x), numerics.bessel_y(m, x)),
        )


def test_y0_small_argument_log_behaviour():
    x = 1e-6
    ratio = numerics.bessel_y(0, x) / ((2.0 / math.pi) * math.log(x))
    assert abs(ratio - 1.0) < 0.01


def hankel_ratio_cf2(x, max_iter=10000):
    """H_1/H_0 via the continued fraction for H_0'/H_0 (modified Lentz).

    H0'/H0 = -1/(2x) + i + (i/x) K with
    K = a1/(b1 + a2/(b2 + ...)), a_k = (k - 1/2)^2, b_k = 2(x + i k).
    """
    tiny = 1e-30
    f, c, d = tiny, tiny, 0.0
    for k in range(1, max_iter):
        a = (k - 0.5) ** 2  # nu = 0
        b = 2.0 * (x + 1.0j * k)
        d = b + a * d
        d = tiny if d == 0 else d
        c = b + a / c
        c = tiny if c == 0 else c
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    log_deriv = -0.5 / x + 1.0j + (1.0j / x) * f
    return -log_deriv  # H1/H0 = -(H0'/H0)


def test_hankel_ratio_against_continued_fraction():
    x = 2.0
    oracle = hankel_ratio_cf2(x)
    mine = numerics.hankel1(1, x) / numerics.hankel1(0, x)
    assert abs(mine - oracle) < 1e-10


def test_bessel_against_mpmath_reference():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 30
    rng = np.random.default_rng(11)
    for _ in range(40):
        m = int(rng.integers(0, 21))
        x = float(rng.uniform(0.1, 50.0))
        ref = float(mp.besselj(m, x))
        val = numerics.bessel_j(m, x)
        assert abs(val - ref) <= 1e-12 * max(1.0, abs(ref))
        refy = float(mp.bessely(m, x))
        assert abs(numerics.bessel_y(m, x) - refy) <= 1e-12 * max(1.0, abs(refy))


def test_bessel_domain_errors():
    with pytest.raises(DomainError):
        numerics.bessel_j(0, -1.0)
    with pytest.raises(DomainError):
        numerics.hankel1(0, 0.0)
    with pytest.raises(DomainError):
        numerics.bessel_y(2, -3.0)


def test_lstsq_identity_and_vandermonde():
    rng = np.random.default_rng(0)
    b = rng.standard_normal(6)
    res = numerics.lstsq(np.eye(6), b)
    assert np.allclose(res.x, b, atol=1e-14, rtol=0)

    t = np.linspace(0, 1, 30)
    A = np.vander(t, 3, increasing=True)
    coeffs = np.array([0.7, -1.3, 2.5])
    res = numerics.lstsq(A, A @ coeffs)
    assert np.max(np.abs(res.x - coeffs)) < 1e-10


def test_lstsq_normal_equation_residual():
    rng = np.random.default_rng(42)
    A = rng.standard_normal((200, 50))
    b = rng.standard_normal(200)
    x = numerics.lstsq(A, b).x
    rel = np.linalg.norm(A.T @ (A @ x - b)) / np.linalg.norm(A.T @ b)
    assert rel <= 1e-9


def test_lstsq_rank_deficiency_signalled():
    A = np.ones((10, 3))
    A[:, 1] = 2.0 * A[:, 0]
    A[:, 2] = np.arange(10)
    with pytest.raises(RankDeficient) as err:
        numerics.lstsq(A, np.arange(10.0))
    assert err.value.rank == 2
    # non-strict mode returns the minimum-norm solution instead
    res = numerics.lstsq(A, np.arange(10.0), strict=False)
    assert res.rank == 2


def test_quad_1d():
    val = numerics.quad_1d(lambda t: math.cos(t) ** 2, 0.0, 2.0 * math.pi, tol=1e-12)
    assert abs(val - math.pi) < 1e-12
    assert numerics.quad_1d(lambda t: 0.0, 0.0, 1.0) == 0.0

    j01 = numerics.bessel_j_zeros(0, 1)[0]
    val = numerics.quad_1d(lambda r: numerics.bessel_j(0, j01 * r) ** 2 * r, 0, 1,
                           tol=1e-12)
    exact = 0.5 * numerics.bessel_j(1, j01) ** 2
    assert abs(val - exact) < 1e-10


def test_quad_disk_bessel_norm():
    j01 = numerics.bessel_j_zeros(0, 1)[0]
    val = numerics.quad_disk(
        lambda x, y: numerics.bessel_j(0, j01 * np.hypot(x, y)) ** 2)
    exact = math.pi * numerics.bessel_j(1, j01) ** 2
    assert abs(val - exact) < 1e-10


def test_quad_complex_and_circle():
    val = numerics.quad_1d(lambda t: np.exp(1j * t), 0.0, math.pi, tol=1e-12)
    assert abs(val - (1j * 2.0)) < 1e-11
    val = numerics.quad_circle(lambda th: np.cos(th) ** 2)
    assert abs(val - math.pi) < 1e-12


def test_bracket_root():
    r = numerics.bracket_root(lambda x: x ** 2 - 2.0, 0.0, 2.0)
    assert abs(r - math.sqrt(2.0)) < 1e-12
    with pytest.raises(DomainError):
        numerics.bracket_root(lambda x: x ** 2 + 1.0, -1.0, 1.0)
