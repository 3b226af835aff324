"""Homogenized outer models: alpha, modal series, shell estimates."""

import math
import warnings

import numpy as np
import pytest
import scipy.special as sp

from cagecalc import discrete, homogenized as hg
from cagecalc.cellsolve import dirichlet_constants, neumann_lambda, closed
from cagecalc.errors import InvalidRegime, NearResonance, RegimeWarning
from cagecalc.geometry import CageConfig, WireShape, build_cage
from cagecalc.numerics import quad_circle


def test_alpha_values_and_blowup():
    eps = 2 * math.pi / 40
    assert hg.alpha_of(0.01, 0.0, eps) == pytest.approx(14.45456, abs=1e-4)
    with pytest.raises(InvalidRegime) as err:
        hg.alpha_of(1.0 / (2.0 * math.pi), 0.0, eps)
    assert err.value.delta_inf == pytest.approx(1.0 / (2.0 * math.pi))


def test_alpha_segment_blowup_at_corrected_delta():
    # with a0 = log 2 the denominator log(1/(2 pi d)) + a0 vanishes at
    # d = e^{a0}/(2 pi) = 1/pi (not e^{-a0}/(2 pi); the small-delta law
    # sigma ~ -(1/2pi) log(pi d) for slits vanishes at d = 1/pi)
    a0 = math.log(2.0)
    with pytest.raises(InvalidRegime):
        hg.alpha_of(1.0 / math.pi, a0, 0.1)
    alpha = hg.alpha_of(1.0 / (4.0 * math.pi), a0, 0.1)
    assert alpha > 0.0
    # the shared small-delta law for slits indeed vanishes at d = 1/pi
    assert closed.small_delta_sigma_tau(1.0 / math.pi, a0) == pytest.approx(0.0, abs=1e-15)


def test_laplace_thin_gradient():
    assert hg.laplace_thin_interior(2.0, 0.0).gradient_at_origin() == pytest.approx(
        1.0 / (4.0 * math.pi))
    assert hg.laplace_thin_interior(2.0, 1e12).gradient_at_origin() < 1e-12
    assert hg.laplace_thin_interior(2.0, 14.454).gradient_at_origin() == \
        pytest.approx(1.0 / (16.454 * math.pi * 2.0), rel=1e-10)


def test_laplace_thick_limits():
    assert hg.laplace_thick_interior(2.0, 0.0, 0.1).gradient_at_origin() == 0.0
    # consistency with the thin model when tau = 1/(eps alpha)
    alpha, eps = 100.0, 0.2
    thin = hg.laplace_thin_interior(2.0, alpha).gradient_at_origin()
    thick = hg.laplace_thick_interior(2.0, 1.0 / (eps * alpha), eps)
    rel = abs(thick.gradient_at_origin() - thin) / thin
    assert rel <= 2.0 / alpha * 1.01


def test_laplace_thick_vs_discrete():
    geom = build_cage(CageConfig(M=40, delta=0.3))
    g = discrete.solve_laplace(geom, 2.0).gradient(0.0)
    gd = float(np.hypot(g[0].real, g[1].real))
    tau = dirichlet_constants(WireShape.DISK, 0.3).tau_plus
    pred = abs(tau) * (2 * math.pi / 40) / (math.pi * 2.0)
    assert abs(gd - pred) / pred < 0.10


def test_helmholtz_thin_alpha_zero_is_free_field():
    series = hg.helmholtz_thin_interior(1.0, 2.0, 0.0)
    rng = np.random.default_rng(7)
    for _ in range(20):
        rho, th = rng.uniform(0.0, 0.95), rng.uniform(0.0, 2 * math.pi)
        z = rho * np.exp(1j * th)
        free = 0.25j * sp.hankel1(0, abs(z - 2.0))
        assert abs(series.value_at(rho, th) - free) < 1e-8


def test_helmholtz_thin_origin_against_raw_denominator():
    k, alpha = 1.0, 14.454
    num = 0.25j * sp.hankel1(0, 2.0 * k)
    den = 1.0 + (alpha / k) / (sp.jvp(0, k) / sp.jv(0, k)
                               - sp.h1vp(0, k) / sp.hankel1(0, k))
    direct = num / den
    mine = hg.helmholtz_thin_interior(k, 2.0, alpha).value_at_origin()
    assert abs(mine - direct) < 1e-10
    assert abs(hg.helmholtz_thin_interior(1.0, 2.0, 1e9).value_at_origin()) < 1e-6


def test_helmholtz_thick_guard_and_origin():
    assert abs(hg.helmholtz_thick_interior(1.5, 2.0, 0.0, 0.2).value_at_origin()) == 0.0
    with pytest.raises(NearResonance) as err:
        hg.helmholtz_thick_interior(2.40483, 2.0, 0.1, 2 * math.pi / 30)
    assert err.value.k_zero == pytest.approx(2.404826, abs=1e-5)


def test_helmholtz_thick_vs_discrete_off_resonance():
    geom = build_cage(CageConfig(M=30, delta=0.1))
    tau = dirichlet_constants(WireShape.DISK, 0.1).tau_plus
    series = hg.helmholtz_thick_interior(1.5, 2.0, tau, 2 * math.pi / 30)
    disc = abs(discrete.solve_helmholtz(geom, 1.5, 2.0).value(0.0))
    assert abs(abs(series.value_at_origin()) - disc) / disc < 0.10


def test_shielding_monotone_in_alpha():
    vals_l = [hg.laplace_thin_interior(2.0, a).gradient_at_origin()
              for a in np.linspace(1.0, 100.0, 25)]
    assert all(a > b for a, b in zip(vals_l, vals_l[1:]))
    vals_h = [abs(hg.helmholtz_thin_interior(1.0, 2.0, a).value_at_origin())
              for a in np.linspace(1.0, 100.0, 25)]
    assert all(a > b for a, b in zip(vals_h, vals_h[1:]))


def test_truncation_stability():
    for series_fn in (
        lambda m0: hg.laplace_thin_interior(2.0, 5.0, m_start=m0),
        lambda m0: hg.helmholtz_thin_interior(1.0, 2.0, 5.0, m_start=m0),
        lambda m0: hg.helmholtz_thick_interior(1.0, 2.0, 0.07, 0.2, m_start=m0),
    ):
        a = series_fn(40).value_at(0.9, 0.3)
        b = series_fn(80).value_at(0.9, 0.3)
        assert abs(a - b) <= 1e-9 * max(abs(a), 1e-12)


def test_thin_thick_overlap():
    eps = 2 * math.pi / 40
    for d in (0.005, 0.02):
        c = dirichlet_constants(WireShape.DISK, d)
        alpha = hg.alpha_of(d, 0.0, eps)
        thin = abs(hg.helmholtz_thin_interior(1.0, 2.0, alpha).value_at_origin())
        thick = abs(hg.helmholtz_thick_interior(1.0, 2.0, c.tau_plus, eps)
                    .value_at_origin())
        assert abs(thin - thick) / thin < 0.15


def test_inverse_linear_in_M():
    d = 0.1
    grads = {}
    for M in (20, 40):
        eps = 2 * math.pi / M
        alpha = hg.alpha_of(d, 0.0, eps)
        grads[M] = hg.laplace_thin_interior(2.0, alpha).gradient_at_origin()
    assert abs(grads[40] / grads[20] - 0.5) < 0.05


def test_coefficient_decay_and_m_max():
    series = hg.laplace_thin_interior(2.0, 5.0)
    c = np.abs(series.coefficients[1:])
    m = np.arange(1, len(c) + 1)
    assert np.all(c <= 1.05 * c[0] * (1.0 / 2.0) ** (m - 1))


def test_neumann_shell_laplace_average():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        est = hg.neumann_shell("laplace", 0.0, 2.0, eps_lambda=8.0)
    avg = quad_circle(lambda th: est.exterior_boundary_value(th), tol=1e-12) \
        / (2.0 * math.pi)
    assert abs(avg - est.interior_constant) < 1e-8
    assert est.interior_constant == pytest.approx(-math.log(2.0) / (2 * math.pi))
    assert hg.neumann_shell("helmholtz", 1.0, 2.0, 1e9).interior_scale < 1e-8


def test_neumann_shell_regime_warning():
    with pytest.warns(RegimeWarning):
        hg.neumann_shell("laplace", 0.0, 2.0, eps_lambda=2.0)


def test_tangential_shell_eps_lambda():
    # delta = 1/2 - A e^{-c/eps}: eps*lambda ~ c/pi - (eps/pi) log(pi A)
    A, ccoef, eps = 1.0, 1.0, 0.1
    d = 0.5 - A * math.exp(-ccoef / eps)
    lam = neumann_lambda(WireShape.TANGENTIAL_SEGMENT, d)
    approx = ccoef / math.pi - (eps / math.pi) * math.log(math.pi * A)
    assert abs(eps * lam - approx) / approx < 0.02
