"""Cell problems: closed forms, both numeric engines, higher-order constants."""

import math

import numpy as np
import pytest

from cagecalc import cellsolve
from cagecalc.cellsolve import GridSpec, closed, multipole
from cagecalc.cellsolve.constants import _richardson
from cagecalc.cellsolve.fd import StripFD
from cagecalc.errors import DomainError, NoConvergence, WindowTooClose
from cagecalc.geometry import WireShape

DISK = WireShape.DISK
TANG = WireShape.TANGENTIAL_SEGMENT
PERP = WireShape.PERPENDICULAR_SEGMENT
SQ = WireShape.SQUARE


# --- closed forms ------------------------------------------------------------

def test_tangential_closed_values():
    sigma, tau = closed.tangential_sigma_tau(1.0 / 6.0)
    assert sigma == tau
    assert sigma == pytest.approx(math.log(2.0) / (2.0 * math.pi), abs=1e-12)
    sigma, tau = closed.tangential_sigma_tau(0.5)
    assert sigma == 0.0 and tau == 0.0


def test_perpendicular_closed_values():
    sigma, tau = closed.perpendicular_sigma_tau(0.25)
    assert sigma == pytest.approx(-0.0223337, abs=1e-6)
    assert tau == pytest.approx(0.0671488, abs=1e-6)


def test_tangential_lambda_value():
    assert closed.tangential_lambda(0.25) == pytest.approx(
        math.log(2.0) / (2.0 * math.pi), abs=1e-12)


def test_small_delta_asymptote_and_a0():
    assert closed.a0_constant(DISK) == 0.0
    assert closed.a0_constant(TANG) == pytest.approx(math.log(2.0))
    assert closed.a0_constant(PERP) == pytest.approx(math.log(2.0))
    # slit closed forms approach the shared small-delta law
    d = 1e-4
    law = closed.small_delta_sigma_tau(d, a0=math.log(2.0))
    assert closed.tangential_sigma_tau(d)[0] == pytest.approx(law, rel=1e-4)
    assert closed.perpendicular_sigma_tau(d)[0] == pytest.approx(law, rel=1e-4)


def test_conformal_evaluators_far_field():
    """The slit evaluators reproduce their own far-field constants."""
    d = 0.2
    N = np.full(64, 2.5)
    S = np.linspace(-0.5, 0.5, 64, endpoint=False)
    phi = closed.tangential_phi_plus(N + 1j * S, d)
    assert np.allclose(phi - 2.5, closed.tangential_sigma_tau(d)[0], atol=1e-6)
    psi = closed.tangential_psi(N + 1j * S, d)
    assert np.allclose(psi - 2.5, closed.tangential_lambda(d), atol=1e-6)
    phi = closed.perpendicular_phi_plus(-(N + 1j * S), 0.3)
    assert np.allclose(phi, closed.perpendicular_sigma_tau(0.3)[1], atol=1e-6)


def test_conformal_phi_vanishes_on_slit():
    d = 0.3
    S = np.linspace(-d + 1e-3, d - 1e-3, 11)
    phi = closed.tangential_phi_plus(1e-12 + 1j * S, d)
    assert np.max(np.abs(phi)) < 1e-9


# --- far-field fit -----------------------------------------------------------

def _grid_solution(values_fn, n=40, n_max=3.0):
    h = 1.0 / n
    N = -n_max + (np.arange(int(2 * n_max * n)) + 0.5) * h
    S = -0.5 + np.arange(n) * h
    NN, SS = np.meshgrid(N, S, indexing="ij")
    return cellsolve.CellSolution(N=N, S=S, values=values_fn(NN, SS), h=h,
                                  n_max=n_max, shape=DISK, delta=0.1,
                                  bc="dirichlet")


def test_far_field_fit_linear_exact():
    sol = _grid_solution(lambda N, S: N + 0.3)
    fit = cellsolve.far_field_fit(sol, "right", order=1)
    assert fit.constant == pytest.approx(0.3, abs=1e-12)
    assert fit.slope == pytest.approx(1.0, abs=1e-12)


def test_far_field_fit_quadratic_exact():
    sol = _grid_solution(lambda N, S: -0.5 * N ** 2 + 0.7 * N - 0.2)
    fit = cellsolve.far_field_fit(sol, "right", order=2)
    assert fit.coefficients[0] == pytest.approx(-0.2, abs=1e-10)
    assert fit.coefficients[1] == pytest.approx(0.7, abs=1e-10)
    assert fit.coefficients[2] == pytest.approx(-0.5, abs=1e-10)


def test_far_field_fit_tangential_sampled():
    d = 0.2
    sol = _grid_solution(lambda N, S: closed.tangential_phi_plus(N + 1j * S, d))
    fit = cellsolve.far_field_fit(sol, "right", order=1)
    exact = -math.log(math.sin(0.2 * math.pi)) / (2.0 * math.pi)
    assert abs(fit.constant - exact) < 1e-4


def test_far_field_fit_window_too_close():
    sol = _grid_solution(lambda N, S: N + 0.3 + 2.0 * np.exp(-(3.0 - N)))
    with pytest.raises(WindowTooClose):
        cellsolve.far_field_fit(sol, "right", order=1)


def test_richardson_no_convergence():
    with pytest.raises(NoConvergence):
        _richardson([1.0, 1.5, 2.5], 2.0, 1e-3, "test")


# --- multipole engine --------------------------------------------------------

def test_lattice_sums_against_closed_forms():
    Z = np.array([0.3 + 0.2j, 0.05 - 0.45j, 1.7 + 0.49j, -0.8 + 0.1j])
    E = multipole.lattice_sums(Z, 4)
    assert np.max(np.abs(E[0] - np.pi / np.tanh(np.pi * Z))) < 1e-13
    assert np.max(np.abs(E[1] - (np.pi / np.sinh(np.pi * Z)) ** 2)) < 1e-13


def test_disk_small_delta_asymptote():
    _, c = cellsolve.cell_dirichlet_numeric(DISK, 0.01)
    law = closed.small_delta_sigma_tau(0.01, a0=0.0)
    assert abs(c.sigma_plus - law) / law < 0.02
    assert abs(c.tau_plus - law) / law < 0.02


def test_disk_touching_limit():
    _, c = cellsolve.cell_dirichlet_numeric(DISK, 0.5)
    assert c.sigma_plus == pytest.approx(-0.44, abs=0.01)
    assert abs(c.tau_plus) < 1e-3


def test_disk_near_touching_perturbation():
    _, c = cellsolve.cell_dirichlet_numeric(DISK, 0.45)
    assert c.sigma_plus == pytest.approx(-0.44 + 1.07 * 0.05, rel=0.05)


def test_disk_monotonicity_and_sign_change():
    deltas = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45]
    sigmas, taus = [], []
    for d in deltas:
        c = cellsolve.dirichlet_constants(DISK, d)
        sigmas.append(c.sigma_plus)
        taus.append(c.tau_plus)
    assert all(a > b for a, b in zip(sigmas, sigmas[1:]))
    assert all(a > b for a, b in zip(taus, taus[1:]))
    s10 = cellsolve.dirichlet_constants(DISK, 0.10).sigma_minus
    s14 = cellsolve.dirichlet_constants(DISK, 0.14).sigma_minus
    assert s10 > 0.0 > s14


def test_disk_plus_minus_symmetry():
    sp, tp, _ = multipole.dirichlet_constants(0.2, "plus")
    sm, tm, _ = multipole.dirichlet_constants(0.2, "minus")
    assert abs(sp - sm) < 1e-12
    assert abs(tp - tm) < 1e-12


def test_exponential_far_field_approach():
    sol = multipole.solve_dirichlet(0.2)
    sigma = sol.right_constant
    S = np.linspace(-0.5, 0.5, 128, endpoint=False)

    def defect(N):
        return np.max(np.abs(sol.value(N + 1j * S) - (N + sigma)))

    ratio = defect(2.0) / defect(1.0)
    assert abs(ratio / math.exp(-2.0 * math.pi) - 1.0) < 0.2


def test_fd_matches_multipole_disk():
    s_mp, t_mp, _ = multipole.dirichlet_constants(0.4, "plus")
    fd = StripFD(DISK, 0.4, "dirichlet", 0.0, 1.0, n=80, n_max=2.0)
    s, t = fd.dirichlet_constants()
    assert abs(s - s_mp) < 1e-3
    assert abs(t - t_mp) < 1e-3


def test_tangential_numeric_vs_closed():
    _, c = cellsolve.cell_dirichlet_numeric(TANG, 0.2)
    exact = closed.tangential_sigma_tau(0.2)[0]
    assert abs(c.sigma_plus - exact) < 1e-3
    assert abs(c.tau_plus - exact) < 1e-3


# --- Neumann -----------------------------------------------------------------

def test_neumann_perpendicular_no_blockage():
    sol, lam = cellsolve.cell_neumann(PERP, 1.7)
    assert sol is None and lam == 0.0


def test_neumann_disk_lambda():
    _, lam = cellsolve.cell_neumann(DISK, 0.05)
    small = math.pi * 0.05 ** 2
    assert abs(lam - small) / small < 0.03
    refined = closed.disk_lambda_refined(0.05)
    assert abs(lam - refined) / refined < 0.01
    _, lam1 = cellsolve.cell_neumann(DISK, 0.1)
    assert abs(lam1 - closed.disk_lambda_refined(0.1)) / lam1 < 0.01


def test_neumann_tangential_numeric_vs_closed():
    _, lam = cellsolve.cell_neumann(TANG, 0.3, force_numeric=True)
    assert abs(lam - closed.tangential_lambda(0.3)) < 1e-3


def test_neumann_square_smoke():
    grid = GridSpec(n=40, refine=2, tol=5e-3)  # smoke accuracy only
    _, lam1 = cellsolve.cell_neumann(SQ, 0.2, grid=grid)
    _, lam2 = cellsolve.cell_neumann(SQ, 0.4, grid=grid)
    assert 0.0 < lam1 < lam2


# --- higher-order constants --------------------------------------------------

def test_tilde_models_distinct_and_symmetric():
    s1 = cellsolve.cell_dirichlet_tilde(DISK, 0.2, wire_model=1)
    s2 = cellsolve.cell_dirichlet_tilde(DISK, 0.2, wire_model=2)
    assert abs(s1 - s2) > 1e-3
    sp, _, _ = multipole.solve_dirichlet_tilde(0.2, model=1, side="plus")
    sm, _, _ = multipole.solve_dirichlet_tilde(0.2, model=1, side="minus")
    assert abs(sp - sm) < 1e-10


def test_tilde_stability_under_refinement():
    a = multipole.solve_dirichlet_tilde(0.1, model=2)[0]
    b = multipole.solve_dirichlet_tilde(0.1, model=2, n_terms=60)[0]
    assert abs(a - b) < 1e-3 * abs(a)  # 3 significant figures


def test_tilde_fd_oracle():
    """Independent forced-Poisson FD solve reproduces the multipole tilde."""
    phi = multipole.solve_dirichlet(0.2)

    def forcing(NN, SS):
        Z = NN + 1j * SS
        with np.errstate(all="ignore"):
            f1 = phi.complex_derivative(Z, 1)
            f2 = phi.complex_derivative(Z, 2)
        return -2.0 * NN * f2.real - f1.real

    vals = []
    for n in (40, 80):
        fd = StripFD(DISK, 0.2, "dirichlet", slope_left=0.0, slope_right=-2.0,
                     n=n, n_max=2.0, forcing=forcing)
        Nw, prof = fd.side_profile("right")
        vals.append(float(np.mean(prof + 0.5 * Nw ** 2)))
    extrap = vals[-1] + (vals[-1] - vals[-2]) / 3.0
    s_mp = multipole.solve_dirichlet_tilde(0.2, model=2)[0]
    assert abs(extrap - s_mp) < 1e-4


def test_disk_model1_tilde_identity():
    # observed exact regularity of the Model-1 disk: sigma_tilde = delta^2/2
    for d in (0.1, 0.3):
        s1 = cellsolve.cell_dirichlet_tilde(DISK, d, wire_model=1)
        assert s1 == pytest.approx(d * d / 2.0, abs=1e-8)


def test_mu_constants():
    mt, mh, mc = cellsolve.cell_neumann_higher(DISK, 0.2)
    assert mc == pytest.approx(0.5 * math.pi * 0.2 ** 2, abs=1e-12)
    assert mh == 0.0
    assert np.isfinite(mt)
    assert cellsolve.cell_neumann_higher(TANG, 0.3, 2) == (0.0, 0.0, 0.0)
    assert cellsolve.wire_area(TANG, 0.3) == 0.0
    assert cellsolve.wire_area(PERP, 0.3) == 0.0
    with pytest.raises(NotImplementedError):
        cellsolve.cell_neumann_higher(TANG, 0.3, 1)


# --- CellSolution artifacts --------------------------------------------------

def test_cell_solution_invariants_fd():
    sol, _ = cellsolve.cell_dirichlet_numeric(SQ, 0.3, GridSpec(n=40, refine=1))
    scale = np.nanmax(np.abs(sol.values))
    assert sol.interior_residual_bound() <= 10.0 * sol.h ** 2 * scale


def test_cell_solution_periodicity_multipole():
    sol = multipole.solve_dirichlet(0.2)
    N = np.linspace(-1.5, 1.5, 31)
    top = sol.value(N + 0.5j)
    bottom = sol.value(N - 0.5j)
    assert np.max(np.abs(top - bottom)) < 1e-12


def test_cell_solution_csv(tmp_path):
    sol, _ = cellsolve.cell_dirichlet_numeric(DISK, 0.2)
    path = tmp_path / "cell.csv"
    sol.to_csv(path)
    data = np.genfromtxt(path, delimiter=",", skip_header=2)
    assert data.shape[1] == 3
    assert data.shape[0] == sol.values.size


def test_delta_domain_checks():
    with pytest.raises(DomainError):
        cellsolve.cell_dirichlet_numeric(DISK, 0.55)
    with pytest.raises(DomainError):
        closed.tangential_sigma_tau(0.0)
    with pytest.raises(DomainError):
        cellsolve.cell_dirichlet_analytic(DISK, 0.2)
