"""Acceptance criteria for the toolkit, runnable via `cagecalc selftest`.

Each criterion is a function returning a CriterionResult; the pytest module
tests/test_acceptance.py wraps the same registry.  Tolerances are fixed
here and nowhere else.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import cellsolve, discrete, homogenized, resonance
from .geometry import CageConfig, Curve, WireShape, build_cage
from .numerics import bessel_j, bessel_y, lstsq

__all__ = ["CriterionResult", "CRITERIA", "run_all"]


@dataclass
class CriterionResult:
    name: str
    passed: bool
    detail: str
    elapsed: float


def _result(name, t0, checks):
    """checks: list of (label, ok, text)."""
    passed = all(ok for _, ok, _ in checks)
    detail = "; ".join(f"{label}: {text}" for label, _, text in checks)
    bad = [label for label, ok, _ in checks if not ok]
    if bad:
        detail += f" [FAILED: {', '.join(bad)}]"
    return CriterionResult(name, passed, detail, time.perf_counter() - t0)


# --- shared heavy pieces (cached across criteria) ---------------------------

@lru_cache(maxsize=None)
def _circle_geom(M, delta):
    return build_cage(CageConfig(curve=Curve.UNIT_CIRCLE, M=M, delta=delta))


@lru_cache(maxsize=None)
def _square_geom(M, delta):
    return build_cage(CageConfig(curve=Curve.UNIT_SQUARE, M=M, delta=delta))


@lru_cache(maxsize=None)
def _disk_constants(delta):
    return cellsolve.dirichlet_constants(WireShape.DISK, delta)


@lru_cache(maxsize=None)
def _circle_report(M, delta, z0=2.0):
    """Second-order resonance report for the first axisymmetric circle mode."""
    eps = 2.0 * math.pi / M
    c = _disk_constants(delta)
    st1 = cellsolve.cell_dirichlet_tilde(WireShape.DISK, delta, 1)
    st2 = cellsolve.cell_dirichlet_tilde(WireShape.DISK, delta, 2)
    mode = resonance.find_resonances(Curve.UNIT_CIRCLE, 2.0, 3.0)[0]
    I1, I2, I3 = resonance.mode_integrals_basic(mode)
    _, I4 = resonance.exterior_tilde_field(mode)
    _, I5, I6 = resonance.interior_particular_field(mode)
    I7 = resonance.source_integral_I7(mode, z0)
    rep = resonance.second_order(
        mode, epsilon=eps, sigma_minus=c.sigma_minus, sigma_tilde_minus=st1,
        tau_plus=c.tau_plus, tau_minus=c.tau_minus, I1=I1, I2=I2, I3=I3,
        I4=I4, I5=I5, I6=I6, forcing=c.tau_plus * I7, forcing_kind="exterior",
        sigma_tilde_minus_model2=st2,
    )
    return mode, rep


def _interior_amp(geom, k, z0, P=10):
    return abs(discrete.solve_helmholtz(geom, k, z0, P=P).value(0.0))


def _parabolic_peak(ks, vals):
    i = int(np.argmax(vals))
    i = min(max(i, 1), len(ks) - 2)
    kl, km, kr = ks[i - 1], ks[i], ks[i + 1]
    fl, fm, fr = vals[i - 1], vals[i], vals[i + 1]
    denom = (km - kl) * (fm - fr) - (km - kr) * (fm - fl)
    if denom == 0.0:
        return km
    return km - 0.5 * ((km - kl) ** 2 * (fm - fr) - (km - kr) ** 2 * (fm - fl)) / denom


def _peak_search(amp, k_center, half_window, n_coarse=41):
    """Locate the peak of amp(k) near k_center; returns (k_peak, amp_peak).

    The window recentres itself when the coarse maximum lands on an edge
    (the second-order shift can push the true peak outside the first-order
    guess).
    """
    centre = k_center
    for _ in range(6):
        ks = np.linspace(centre - half_window, centre + half_window, n_coarse)
        vals = [amp(k) for k in ks]
        i = int(np.argmax(vals))
        if 1 < i < len(ks) - 2:
            break
        centre = float(ks[i]) + (half_window if i >= len(ks) - 2 else -half_window) * 0.8
    ks2 = np.linspace(ks[max(i - 1, 0)], ks[min(i + 1, len(ks) - 1)], 17)
    vals2 = [amp(k) for k in ks2]
    k_pk = _parabolic_peak(ks2, vals2)
    return float(k_pk), float(amp(k_pk))


def _half_width(amp, k_peak, amp_peak, guess):
    """Full width at half maximum of amp(k) around the peak."""

    def cross(direction):
        lo, hi = 0.0, guess
        while amp(k_peak + direction * hi) > 0.5 * amp_peak:
            lo, hi = hi, 2.0 * hi
            if hi > 200.0 * guess:
                raise RuntimeError("half-maximum crossing not found")
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            if amp(k_peak + direction * mid) > 0.5 * amp_peak:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    return cross(+1.0) + cross(-1.0)


@lru_cache(maxsize=None)
def _circle_peak_measurement(M, delta, z0=2.0, with_width=False):
    mode, rep = _circle_report(M, delta, z0)
    geom = _circle_geom(M, delta)

    def amp(k):
        return _interior_amp(geom, k, z0)

    window = max(8.0 * abs(rep.a) * rep.epsilon ** 2, 0.012)
    k_pk, a_pk = _peak_search(amp, rep.k_peak, window)
    width = None
    if with_width:
        width = _half_width(amp, k_pk, a_pk, abs(rep.a) * rep.epsilon ** 2)
    return k_pk, a_pk, width


# --- criteria ---------------------------------------------------------------

def criterion_cell_closed_forms():
    """Tangential sigma and lambda from the numeric strip solver vs closed forms."""
    t0 = time.perf_counter()
    checks = []
    for d in (0.1, 0.2, 0.3, 0.45):
        _, c = cellsolve.cell_dirichlet_numeric(WireShape.TANGENTIAL_SEGMENT, d)
        sig_exact = cellsolve.tangential_sigma_tau(d)[0]
        _, lam = cellsolve.cell_neumann(WireShape.TANGENTIAL_SEGMENT, d,
                                        force_numeric=True)
        lam_exact = cellsolve.tangential_lambda(d)
        es, el = abs(c.sigma_plus - sig_exact), abs(lam - lam_exact)
        checks.append((f"sigma({d})", es <= 1e-3, f"err {es:.1e}"))
        checks.append((f"lambda({d})", el <= 1e-3, f"err {el:.1e}"))
    elapsed = time.perf_counter() - t0
    checks.append(("runtime", elapsed < 30.0, f"{elapsed:.1f}s < 30s"))
    return _result("cell constants vs closed forms", t0, checks)


def criterion_disk_cell_limits():
    t0 = time.perf_counter()
    checks = []
    _, c = cellsolve.cell_dirichlet_numeric(WireShape.DISK, 0.5)
    checks.append(("sigma(0.5)", abs(c.sigma_plus + 0.44) <= 0.01,
                   f"{c.sigma_plus:.4f} vs -0.44"))
    checks.append(("tau(0.5)", abs(c.tau_plus) < 1e-3, f"{c.tau_plus:.1e}"))
    c01 = _disk_constants(0.01)
    asym = cellsolve.small_delta_sigma_tau(0.01, a0=0.0)
    rs = abs(c01.sigma_plus - asym) / asym
    rt = abs(c01.tau_plus - asym) / asym
    checks.append(("sigma(0.01)", rs <= 0.02, f"rel {rs:.2%}"))
    checks.append(("tau(0.01)", rt <= 0.02, f"rel {rt:.2%}"))
    lam = cellsolve.neumann_lambda(WireShape.DISK, 0.05)
    rl = abs(lam - math.pi * 0.05 ** 2) / (math.pi * 0.05 ** 2)
    checks.append(("lambda(0.05)", rl <= 0.03, f"rel {rl:.2%} vs pi d^2"))
    return _result("disk cell limits", t0, checks)


def criterion_neumann_higher_identities():
    t0 = time.perf_counter()
    checks = []
    from .numerics import quad_disk

    for d in (0.1, 0.3):
        mu = cellsolve.cell_neumann_higher(WireShape.DISK, d)
        area = quad_disk(lambda x, y: np.ones_like(x), radius=d)
        checks.append((f"disk mu_check({d})", abs(mu[2] - 0.5 * area) <= 1e-10,
                       f"{mu[2]:.8f} vs half-area {0.5 * area:.8f}"))
    # square wires: the identity mu_check = area/2 with area (sqrt(2) delta)^2
    d = 0.2
    area_sq = cellsolve.wire_area(WireShape.SQUARE, d)
    checks.append(("square mu_check", abs(0.5 * area_sq - d ** 2) <= 1e-14,
                   f"half-area {0.5 * area_sq:.6f} vs delta^2 {d ** 2:.6f}"))
    mt, mh, mc = cellsolve.cell_neumann_higher(WireShape.TANGENTIAL_SEGMENT, 0.3, 2)
    ok = max(abs(mt), abs(mh), abs(mc)) <= 1e-6
    checks.append(("tangential model-2 zeros", ok, f"max {max(abs(mt), abs(mh), abs(mc)):.1e}"))
    return _result("higher-order Neumann identities", t0, checks)


def criterion_gap_thickness_table():
    t0 = time.perf_counter()
    checks = []
    _, gap_t = cellsolve.gap_fraction_for_tau(WireShape.TANGENTIAL_SEGMENT, 0.01)
    checks.append(("tangential", abs(gap_t - 0.223) <= 0.005, f"{gap_t:.4f} vs 0.223"))
    _, gap_d = cellsolve.gap_fraction_for_tau(WireShape.DISK, 0.01)
    checks.append(("disks", abs(gap_d - 0.54) <= 0.03, f"{gap_d:.4f} vs 0.54"))
    _, gap_s = cellsolve.gap_fraction_for_tau(WireShape.SQUARE, 0.01)
    checks.append(("squares", abs(gap_s - 0.61) <= 0.03, f"{gap_s:.4f} vs 0.61"))
    d_perp = cellsolve.delta_for_tau(WireShape.PERPENDICULAR_SEGMENT, 0.01,
                                     bracket=(0.1, 2.0))
    checks.append(("perpendicular 2*delta", abs(2 * d_perp - 1.10) <= 0.03,
                   f"{2 * d_perp:.4f} vs 1.10"))
    return _result("gap-thickness table", t0, checks)


def criterion_electrostatic_figure2():
    t0 = time.perf_counter()
    checks = []
    z0 = 2.0
    for M in (20, 40):
        eps = 2.0 * math.pi / M
        for d in (0.01, 0.02):
            geom = _circle_geom(M, d)
            g = discrete.solve_laplace(geom, z0).gradient(0.0)
            gd = float(np.hypot(g[0].real, g[1].real))
            alpha = homogenized.alpha_of(d, 0.0, eps)
            thin = 1.0 / ((alpha + 2.0) * math.pi * abs(z0))
            rel = abs(gd - thin) / thin
            checks.append((f"thin M={M} d={d}", rel <= 0.10, f"rel {rel:.2%}"))
        for d in (0.1, 0.2, 0.3, 0.4):
            geom = _circle_geom(M, d)
            g = discrete.solve_laplace(geom, z0).gradient(0.0)
            gd = float(np.hypot(g[0].real, g[1].real))
            tau = _disk_constants(d).tau_plus
            thick = abs(tau) * eps / (math.pi * abs(z0))
            rel = abs(gd - thick) / thick
            checks.append((f"thick M={M} d={d}", rel <= 0.10, f"rel {rel:.2%}"))
    elapsed = time.perf_counter() - t0
    checks.append(("runtime", elapsed < 120.0, f"{elapsed:.1f}s < 120s"))
    return _result("electrostatic shielding (Fig-2 style)", t0, checks)


def criterion_inverse_linear_law():
    t0 = time.perf_counter()
    checks = []
    d, z0 = 0.1, 2.0
    grads = {}
    for M in (20, 40, 80):
        g = discrete.solve_laplace(_circle_geom(M, d), z0).gradient(0.0)
        grads[M] = float(np.hypot(g[0].real, g[1].real))
    for M in (20, 40):
        ratio = grads[2 * M] / grads[M]
        checks.append((f"{M}->{2 * M}", abs(ratio - 0.5) <= 0.05,
                       f"ratio {ratio:.4f} vs 0.5"))
    return _result("inverse-linear shielding law", t0, checks)


def criterion_resonance_amplification():
    t0 = time.perf_counter()
    M, d, z0 = 30, 0.1, 2.0
    geom = _circle_geom(M, d)
    k_pk, a_pk, _ = _circle_peak_measurement(M, d, z0)
    ks = np.arange(2.2, 2.6 + 1e-9, 0.01)
    background = max(_interior_amp(geom, float(k), z0) for k in ks)
    best_amp = max(a_pk, background)
    k_best = k_pk if a_pk >= background else float(ks[0])
    free = abs(discrete.solve_helmholtz(build_cage(CageConfig(M=0)), k_pk, z0)
               .value(0.0))
    factor = best_amp / free
    ok = 2.2 <= k_pk <= 2.6 and factor > 2.0
    return _result("resonance amplification", t0, [
        ("peak in window", 2.2 <= k_pk <= 2.6, f"k_peak {k_pk:.4f}"),
        ("amplification", factor > 2.0,
         f"|phi(0)| {best_amp:.3f} vs free {free:.3f} (x{factor:.1f})"),
    ])


def criterion_shifted_resonance():
    t0 = time.perf_counter()
    M, d, z0 = 30, 0.1, 2.0
    mode, rep = _circle_report(M, d, z0)
    k_pk, a_pk, _ = _circle_peak_measurement(M, d, z0)
    dk = abs(rep.k_peak - k_pk)
    pred_amp = rep.peak_C * abs(mode.psi_polar(0.0, 0.0)) / rep.epsilon
    rel = abs(pred_amp - a_pk) / a_pk
    return _result("shifted-resonance prediction", t0, [
        ("k_peak", dk <= 0.01, f"|pred-disc| {dk:.5f} (pred {rep.k_peak:.5f})"),
        ("amplitude", rel <= 0.20, f"pred {pred_amp:.3f} vs disc {a_pk:.3f} ({rel:.1%})"),
    ])


def criterion_resonance_scaling():
    t0 = time.perf_counter()
    d, z0 = 0.1, 2.0
    meas = {}
    for M in (30, 60):
        meas[M] = _circle_peak_measurement(M, d, z0, with_width=True)
    amp_ratio = meas[60][1] / meas[30][1]
    width_ratio = meas[30][2] / meas[60][2]
    return _result("resonance scaling laws", t0, [
        ("peak ~ 1/eps", abs(amp_ratio - 2.0) <= 0.5,
         f"amp ratio {amp_ratio:.3f} vs 2"),
        ("width ~ eps^2", abs(width_ratio - 4.0) <= 1.0,
         f"width ratio {width_ratio:.3f} vs 4"),
    ])


def criterion_square_cage_interior_source():
    t0 = time.perf_counter()
    d, z0, probe = 0.1, -0.5, 2.0
    peaks = {}
    c = _disk_constants(d)
    for M in (24, 32, 48):
        geom = _square_geom(M, d)
        eps = 8.0 / M
        rep = resonance.square_cage_report(
            resonance.SquareMode(1, 1), epsilon=eps, sigma_minus=c.sigma_minus,
            tau_plus=c.tau_plus, tau_minus=c.tau_minus, z0=z0)

        def amp(k):
            return abs(discrete.solve_helmholtz(geom, k, z0, P=5).value(probe))

        # window wide enough for the unknown O(eps^2) shift; steps sized by
        # the predicted Lorentzian width so the peak cannot slip through
        width = 2.0 * math.sqrt(3.0) * abs(rep.a) * eps ** 2
        window = eps ** 2 * (0.35 + 12.0 * abs(rep.a))
        n_coarse = max(13, int(math.ceil(2.0 * window / width)) + 1)
        k_pk, a_pk = _peak_search(amp, rep.k_peak, window, n_coarse=n_coarse)
        peaks[M] = (k_pk, a_pk, rep)
    checks = []
    for M1, M2 in ((24, 32), (32, 48)):
        measured = peaks[M2][1] / peaks[M1][1]
        predicted = M2 / M1  # exterior radiated peak ~ 1/(tau_plus eps) ~ M
        rel = abs(measured - predicted) / predicted
        checks.append((f"peak growth {M1}->{M2}", rel <= 0.25,
                       f"ratio {measured:.3f} vs {predicted:.3f} ({rel:.1%})"))
    detail_peaks = ", ".join(f"M={m}: k={v[0]:.4f}, |phi(2)|={v[1]:.3f}"
                             for m, v in peaks.items())
    checks.append(("peaks", True, detail_peaks))
    return _result("square-cage interior source", t0, checks)


def criterion_property_suite():
    t0 = time.perf_counter()
    checks = []
    rng = np.random.default_rng(20240817)

    A = rng.standard_normal((200, 50))
    b = rng.standard_normal(200)
    x = lstsq(A, b).x
    orth = np.linalg.norm(A.T @ (A @ x - b)) / np.linalg.norm(A.T @ b)
    checks.append(("lstsq orthogonality", orth <= 1e-9, f"{orth:.1e}"))

    worst = 0.0
    for m in range(1, 15):
        x = rng.uniform(0.5, 20.0, 8)
        lhs = bessel_j(m - 1, x) + bessel_j(m + 1, x)
        rhs = 2 * m / x * bessel_j(m, x)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    checks.append(("Bessel recurrence", worst <= 1e-9, f"{worst:.1e}"))

    worst = 0.0
    for _ in range(50):
        m = int(rng.integers(0, 8))
        x = float(rng.uniform(0.5, 30.0))
        w = bessel_j(m, x) * bessel_y(m, x, derivative=True) \
            - bessel_j(m, x, derivative=True) * bessel_y(m, x)
        worst = max(worst, abs(w - 2.0 / (math.pi * x)))
    checks.append(("Wronskian", worst <= 1e-10, f"{worst:.1e}"))

    geom = _circle_geom(20, 0.1)
    za, zb = 0.3 + 0.0j, 2.0 + 0.0j
    v_ab = discrete.greens_value(discrete.solve_laplace(geom, zb), za)
    v_ba = discrete.greens_value(discrete.solve_laplace(geom, za), zb)
    checks.append(("reciprocity", abs(v_ab - v_ba) <= 1e-6,
                   f"|diff| {abs(v_ab - v_ba):.1e}"))

    sol = discrete.solve_helmholtz(geom, 1.7, 2.0)
    h = 1e-5
    worst = 0.0
    for _ in range(10):
        z = complex(*rng.uniform(-0.6, 0.6, 2))
        if sol.inside_wire(z):
            continue
        g = sol.gradient(z)
        fx = (sol.value(z + h) - sol.value(z - h)) / (2 * h)
        fy = (sol.value(z + 1j * h) - sol.value(z - 1j * h)) / (2 * h)
        scale = max(abs(fx), abs(fy), 1e-12)
        worst = max(worst, abs(g[0] - fx) / scale, abs(g[1] - fy) / scale)
    checks.append(("gradient vs FD", worst <= 1e-6, f"rel {worst:.1e}"))

    from .cellsolve import multipole as mp
    sp, tp, _ = mp.dirichlet_constants(0.2, "plus")
    sm, tm, _ = mp.dirichlet_constants(0.2, "minus")
    sym = max(abs(sp - sm), abs(tp - tm))
    checks.append(("cell symmetry", sym <= 1e-10, f"{sym:.1e}"))

    _, rep = _circle_report(30, 0.1)
    half = resonance.lorentzian_amplitude(
        rep, rep.k_tilde_tilde_star + math.sqrt(3.0) * abs(rep.a))
    err = abs(half - 0.5 * rep.peak_C)
    checks.append(("Lorentzian half-width", err <= 1e-12 * rep.peak_C, f"{err:.1e}"))

    checks.append(_rescaling_check())
    return _result("property suite", t0, checks)


def _rescaling_check():
    """k_peak and the peak physical field are invariant under psi -> c psi."""
    d, M, z0 = 0.1, 30, 2.0
    eps = 2.0 * math.pi / M
    c = _disk_constants(d)
    st1 = cellsolve.cell_dirichlet_tilde(WireShape.DISK, d, 1)
    base = resonance.find_resonances(Curve.UNIT_CIRCLE, 2.0, 3.0)[0]
    outs = []
    for scale in (1.0, 3.0):
        mode = resonance.CircleMode(base.m, base.q, base.k_star,
                                    base.norm * scale, base.degenerate)
        I1, I2, I3 = resonance.mode_integrals_basic(mode)
        _, I4 = resonance.exterior_tilde_field(mode)
        _, I5, I6 = resonance.interior_particular_field(mode)
        I7 = resonance.source_integral_I7(mode, z0)
        rep = resonance.second_order(
            mode, epsilon=eps, sigma_minus=c.sigma_minus, sigma_tilde_minus=st1,
            tau_plus=c.tau_plus, tau_minus=c.tau_minus, I1=I1, I2=I2, I3=I3,
            I4=I4, I5=I5, I6=I6, forcing=c.tau_plus * I7, forcing_kind="exterior")
        outs.append((rep.k_peak, rep.peak_C * abs(mode.psi_polar(0.0, 0.0)) / eps))
    dk = abs(outs[0][0] - outs[1][0])
    da = abs(outs[0][1] - outs[1][1]) / outs[0][1]
    ok = dk <= 1e-9 and da <= 1e-9
    return ("psi-rescaling invariance", ok, f"dk {dk:.1e}, damp {da:.1e}")


CRITERIA = [
    criterion_cell_closed_forms,
    criterion_disk_cell_limits,
    criterion_neumann_higher_identities,
    criterion_gap_thickness_table,
    criterion_electrostatic_figure2,
    criterion_inverse_linear_law,
    criterion_resonance_amplification,
    criterion_shifted_resonance,
    criterion_resonance_scaling,
    criterion_square_cage_interior_source,
    criterion_property_suite,
]


def run_all(quiet=False):
    ok = True
    for crit in CRITERIA:
        res = crit()
        ok &= res.passed
        tag = "PASS" if res.passed else "FAIL"
        print(f"[{tag}] {res.name} ({res.elapsed:.1f}s): {res.detail}")
    return ok
