"""Configuration-driven command line front end.

Commands:
    cagecalc sweep <config>       parameter sweep -> CSV + JSON summary
    cagecalc grid <config>        field grid -> CSV
    cagecalc resonance <config>   resonance report -> JSON
    cagecalc cell <shape> <delta> [--bc ...] [--model ...]   cell constants
    cagecalc selftest             run the acceptance suite

Configs are flat INI files with [cage], [source], [sweep]/[grid]/[resonance]
and [output] sections; all quantities are dimensionless.  Exit codes:
0 success, 2 config error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import cellsolve, discrete, homogenized, resonance
from .errors import (
    CageError,
    ConfigError,
    InvalidRegime,
    NearResonance,
    SolverFailure,
)
from .geometry import (
    BoundaryKind,
    CageConfig,
    Curve,
    WireModel,
    WireShape,
    build_cage,
)

_SHAPES = {
    "disk": WireShape.DISK,
    "perpendicular": WireShape.PERPENDICULAR_SEGMENT,
    "tangential": WireShape.TANGENTIAL_SEGMENT,
    "square": WireShape.SQUARE,
}
_CURVES = {"circle": Curve.UNIT_CIRCLE, "square": Curve.UNIT_SQUARE}


def _fail_config(msg):
    raise ConfigError(msg)


def _get(cfg, section, option, cast=str, default=None, required=False):
    if not cfg.has_option(section, option):
        if required:
            _fail_config(f"missing [{section}] {option}")
        return default
    raw = cfg.get(section, option)
    try:
        return cast(raw)
    except (TypeError, ValueError) as exc:
        _fail_config(f"bad value for [{section}] {option}: {raw!r} ({exc})")


def _parse_complex(text):
    return complex(text.replace(" ", "").replace("i", "j"))


def _read_config(path):
    cfg = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cfg.read_file(fh)
    except OSError as exc:
        _fail_config(f"cannot read config {path}: {exc}")
    except configparser.Error as exc:
        _fail_config(f"parse error in {path}: {exc}")
    return cfg


def _config_hash(cfg):
    items = []
    for section in sorted(cfg.sections()):
        for key in sorted(cfg.options(section)):
            items.append(f"{section}.{key}={cfg.get(section, key)}")
    return hashlib.sha256("\n".join(items).encode()).hexdigest()[:16]


def _cage_from(cfg, M=None, delta=None):
    curve = _get(cfg, "cage", "curve", str, "circle").lower()
    if curve not in _CURVES:
        _fail_config(f"unknown curve {curve!r}")
    shape = _get(cfg, "cage", "shape", str, "disk").lower()
    if shape not in _SHAPES:
        _fail_config(f"unknown wire shape {shape!r}")
    try:
        return CageConfig(
            curve=_CURVES[curve],
            M=M if M is not None else _get(cfg, "cage", "m", int, required=True),
            delta=delta if delta is not None else _get(cfg, "cage", "delta", float,
                                                       required=True),
            wire_shape=_SHAPES[shape],
            wire_model=WireModel(_get(cfg, "cage", "model", int, 1)),
            bc=BoundaryKind(_get(cfg, "cage", "bc", str, "dirichlet").lower()),
            start_arclength=_get(cfg, "cage", "start", float, 0.0),
        )
    except (ValueError, CageError) as exc:
        _fail_config(f"bad cage section: {exc}")


@dataclass
class SweepSpec:
    cfg: configparser.ConfigParser
    variable: str
    values: np.ndarray
    models: list
    probes: list  # (label, complex point)
    equation: str
    z0: complex
    k_fixed: float
    P: int
    csv_path: Path
    json_path: Path
    threads: int = 1


def _parse_sweep(cfg, out_dir, threads):
    variable = _get(cfg, "sweep", "variable", str, required=True).lower()
    if variable not in ("k", "delta", "m"):
        _fail_config(f"sweep variable must be k, delta or M, not {variable!r}")
    start = _get(cfg, "sweep", "start", float, required=True)
    stop = _get(cfg, "sweep", "stop", float, required=True)
    count = _get(cfg, "sweep", "count", int, required=True)
    if count < 2:
        _fail_config("sweep count must be >= 2")
    spacing = _get(cfg, "sweep", "spacing", str, "linear").lower()
    if spacing == "log":
        values = np.geomspace(start, stop, count)
    elif spacing == "linear":
        values = np.linspace(start, stop, count)
    else:
        _fail_config(f"unknown spacing {spacing!r}")
    models = [m.strip() for m in _get(cfg, "sweep", "models", str,
                                      "discrete").split(",") if m.strip()]
    known = {"discrete", "thin", "thick", "resonance", "neumann-shell"}
    for m in models:
        if m not in known:
            _fail_config(f"unknown model {m!r} (choose from {sorted(known)})")
    probe_text = [p.strip() for p in _get(cfg, "sweep", "probes", str,
                                          "0").split(",") if p.strip()]
    probes = [(p, _parse_complex(p)) for p in probe_text]
    equation = _get(cfg, "source", "equation", str, "helmholtz").lower()
    if equation not in ("laplace", "helmholtz"):
        _fail_config(f"equation must be laplace or helmholtz, not {equation!r}")
    z0 = _parse_complex(_get(cfg, "source", "z0", str, required=True))
    k_fixed = _get(cfg, "source", "k", float, 1.0)
    P = _get(cfg, "sweep", "p", int, 10)
    csv_path = Path(_get(cfg, "output", "csv", str, "sweep.csv"))
    json_path = Path(_get(cfg, "output", "json", str, "sweep_summary.json"))
    if out_dir is not None:
        csv_path = Path(out_dir) / csv_path
        json_path = Path(out_dir) / json_path
    return SweepSpec(cfg, variable, values, models, probes, equation, z0,
                     k_fixed, P, csv_path, json_path, threads)


def _cell_inputs(cage: CageConfig):
    consts = cellsolve.dirichlet_constants(cage.wire_shape, cage.delta)
    return consts


class _ResonanceModel:
    """Lorentzian interior amplitude near the closest nondegenerate mode."""

    def __init__(self, cage, z0, k_lo, k_hi):
        self.cage = cage
        self.z0 = z0
        self.reports = []
        if cage.curve != Curve.UNIT_CIRCLE:
            return
        consts = _cell_inputs(cage)
        st1 = cellsolve.cell_dirichlet_tilde(cage.wire_shape, cage.delta, 1)
        st2 = cellsolve.cell_dirichlet_tilde(cage.wire_shape, cage.delta, 2)
        pad = 0.5
        for mode in resonance.find_resonances(Curve.UNIT_CIRCLE,
                                              max(k_lo - pad, 0.05), k_hi + pad):
            if mode.degenerate:
                continue
            I1, I2, I3 = resonance.mode_integrals_basic(mode)
            _, I4 = resonance.exterior_tilde_field(mode)
            _, I5, I6 = resonance.interior_particular_field(mode)
            I7 = resonance.source_integral_I7(mode, z0)
            rep = resonance.second_order(
                mode, epsilon=cage.epsilon, sigma_minus=consts.sigma_minus,
                sigma_tilde_minus=st1, tau_plus=consts.tau_plus,
                tau_minus=consts.tau_minus, I1=I1, I2=I2, I3=I3, I4=I4,
                I5=I5, I6=I6, forcing=consts.tau_plus * I7,
                forcing_kind="exterior", sigma_tilde_minus_model2=st2,
            )
            self.reports.append((mode, rep))

    def amplitude(self, k, probe):
        if not self.reports or abs(probe) >= 1.0:
            return math.nan, "NoResonanceModel"
        mode, rep = min(self.reports, key=lambda mr: abs(mr[1].k_peak - k))
        eps = rep.epsilon
        ktt = (k - rep.k_star - eps * rep.k_tilde_star) / eps ** 2
        c = resonance.lorentzian_amplitude(rep, ktt)
        psi = abs(mode.psi(np.asarray(probe, dtype=complex)))
        return float(c * psi / eps), ""


def run_sweep(spec: SweepSpec):
    """Execute the sweep and write the CSV and JSON artifacts."""
    cage_rows = []
    base = _cage_from(spec.cfg)
    helm = spec.equation == "helmholtz"
    quantity = "abs_phi" if helm else "abs_grad"

    needs_cell = any(m in spec.models for m in ("thin", "thick", "neumann-shell"))
    res_model = None
    if "resonance" in spec.models:
        if spec.variable != "k":
            _fail_config("the resonance model applies to k sweeps")
        res_model = _ResonanceModel(base, spec.z0, spec.values[0], spec.values[-1])

    def sample(idx_value):
        idx, value = idx_value
        if spec.variable == "k":
            cage, k = base, float(value)
        elif spec.variable == "delta":
            cage, k = _cage_from(spec.cfg, delta=float(value)), spec.k_fixed
        else:
            cage, k = _cage_from(spec.cfg, M=int(round(value))), spec.k_fixed
        row = {"value": float(value)}
        geom = build_cage(cage)
        consts = _cell_inputs(cage) if needs_cell else None
        for model in spec.models:
            flag = ""
            vals = {}
            try:
                if model == "discrete":
                    if helm:
                        sol = discrete.solve_helmholtz(geom, k, spec.z0, P=spec.P)
                        for label, p in spec.probes:
                            vals[label] = abs(sol.value(p))
                    else:
                        sol = discrete.solve_laplace(geom, spec.z0, P=spec.P)
                        for label, p in spec.probes:
                            g = sol.gradient(p)
                            vals[label] = float(np.hypot(g[0].real, g[1].real))
                elif model == "thin":
                    alpha = homogenized.alpha_of(cage.delta, consts.a0, cage.epsilon)
                    series = (homogenized.helmholtz_thin_interior(k, spec.z0, alpha)
                              if helm else
                              homogenized.laplace_thin_interior(spec.z0, alpha))
                    vals = _series_probe_values(series, spec.probes, helm)
                elif model == "thick":
                    series = (homogenized.helmholtz_thick_interior(
                                  k, spec.z0, consts.tau_plus, cage.epsilon)
                              if helm else
                              homogenized.laplace_thick_interior(
                                  spec.z0, consts.tau_plus, cage.epsilon))
                    vals = _series_probe_values(series, spec.probes, helm)
                elif model == "resonance":
                    for label, p in spec.probes:
                        vals[label], flag = res_model.amplitude(k, p)
                elif model == "neumann-shell":
                    lam = cellsolve.neumann_lambda(cage.wire_shape, cage.delta)
                    est = homogenized.neumann_shell(spec.equation, k, spec.z0,
                                                    cage.epsilon * lam)
                    for label, _ in spec.probes:
                        vals[label] = est.interior_scale
            except (InvalidRegime, NearResonance) as exc:
                flag = type(exc).__name__
                vals = {label: math.nan for label, _ in spec.probes}
            except CageError as exc:
                raise SolverFailure(
                    f"{model} failed at {spec.variable}={value}: {exc}") from exc
            for label, _ in spec.probes:
                row[f"{model}.{label}.{quantity}"] = vals.get(label, math.nan)
            row[f"{model}.flag"] = flag
        return idx, row

    tasks = list(enumerate(spec.values))
    if spec.threads > 1:
        with ThreadPoolExecutor(max_workers=spec.threads) as pool:
            results = list(pool.map(sample, tasks))
    else:
        results = [sample(t) for t in tasks]
    results.sort(key=lambda r: r[0])
    rows = [r for _, r in results]

    columns = list(rows[0].keys())
    spec.csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(spec.csv_path, "w") as fh:
        fh.write(f"# config-hash={_config_hash(spec.cfg)}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[c]) for c in columns) + "\n")

    summary = {"config_hash": _config_hash(spec.cfg), "variable": spec.variable,
               "columns": {}, "flags": {}}
    for col in columns:
        if col == "value" or col.endswith(".flag"):
            continue
        data = np.array([row[col] for row in rows], dtype=float)
        if np.all(np.isnan(data)):
            continue
        i = int(np.nanargmax(data))
        summary["columns"][col] = {
            "argmax": float(rows[i]["value"]),
            "max": float(data[i]),
        }
    for model in spec.models:
        flags = sorted({row[f"{model}.flag"] for row in rows} - {""})
        if flags:
            summary["flags"][model] = flags
    if res_model is not None:
        summary["resonance_reports"] = [
            json.loads(rep.to_json()) for _, rep in res_model.reports
        ]
    with open(spec.json_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    return spec.csv_path, spec.json_path


def _series_probe_values(series, probes, helm):
    out = {}
    for label, p in probes:
        rho, th = abs(p), math.atan2(p.imag, p.real)
        if rho >= 1.0:
            out[label] = math.nan
        elif helm:
            out[label] = abs(series.value_at(rho, th))
        elif rho == 0.0:
            out[label] = series.gradient_at_origin()
        else:
            h = 1e-6
            vals = [series.value_at(r, t) for r, t in
                    ((rho + h, th), (rho - h, th), (rho, th + h / rho),
                     (rho, th - h / rho))]
            out[label] = float(np.hypot((vals[0] - vals[1]) / (2 * h),
                                        (vals[2] - vals[3]) / (2 * h)))
    return out


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return f"{v:.12g}"


def run_grid(cfg, out_dir):
    cage = _cage_from(cfg)
    geom = build_cage(cage)
    equation = _get(cfg, "source", "equation", str, "helmholtz").lower()
    z0 = _parse_complex(_get(cfg, "source", "z0", str, required=True))
    k = _get(cfg, "source", "k", float, 1.0)
    nx = _get(cfg, "grid", "nx", int, 201)
    ny = _get(cfg, "grid", "ny", int, 201)
    xmin = _get(cfg, "grid", "xmin", float, -2.0)
    xmax = _get(cfg, "grid", "xmax", float, 2.0)
    ymin = _get(cfg, "grid", "ymin", float, -2.0)
    ymax = _get(cfg, "grid", "ymax", float, 2.0)
    P = _get(cfg, "grid", "p", int, 10)
    path = Path(_get(cfg, "output", "csv", str, "grid.csv"))
    if out_dir is not None:
        path = Path(out_dir) / path
    try:
        if equation == "helmholtz":
            sol = discrete.solve_helmholtz(geom, k, z0, P=P)
        else:
            sol = discrete.solve_laplace(geom, z0, P=P)
    except CageError as exc:
        raise SolverFailure(str(exc)) from exc
    x = np.linspace(xmin, xmax, nx)
    y = np.linspace(ymin, ymax, ny)
    X, Y = np.meshgrid(x, y, indexing="ij")
    Z = X + 1j * Y
    vals = np.asarray(sol.value(Z, allow_inside=True), dtype=complex)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(f"# config-hash={_config_hash(cfg)}\n")
        fh.write("x,y,re_phi,im_phi,abs_phi\n")
        for i in range(nx):
            for j in range(ny):
                v = vals[i, j]
                fh.write(
                    f"{_fmt(float(X[i, j]))},{_fmt(float(Y[i, j]))},"
                    f"{_fmt(v.real)},{_fmt(v.imag)},{_fmt(abs(v))}\n"
                )
    return path


def run_resonance_report(cfg, out_dir):
    cage = _cage_from(cfg)
    z0 = _parse_complex(_get(cfg, "source", "z0", str, required=True))
    mode_text = _get(cfg, "resonance", "mode", str, required=True)
    try:
        a, b = (int(t) for t in mode_text.split(","))
    except ValueError:
        _fail_config(f"bad mode selector {mode_text!r}; expected 'm,q' or 'l,m'")
    path = Path(_get(cfg, "output", "json", str, "resonance.json"))
    if out_dir is not None:
        path = Path(out_dir) / path
    path.parent.mkdir(parents=True, exist_ok=True)

    if cage.bc == BoundaryKind.NEUMANN:
        lam = cellsolve.neumann_lambda(cage.wire_shape, cage.delta)
        mode = resonance.neumann_circle_mode(a, b)
        k_shifted, scale = resonance.neumann_resonance(mode, cage.epsilon * lam)
        payload = {
            "mode": mode.label(),
            "k_star": mode.k_star,
            "eps_lambda": cage.epsilon * lam,
            "k_shifted": k_shifted,
            "shift": k_shifted - mode.k_star,
            "peak_amplitude_scale": scale,
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
        return path

    consts = _cell_inputs(cage)
    if cage.curve == Curve.UNIT_SQUARE:
        rep = resonance.square_cage_report(
            resonance.SquareMode(a, b), epsilon=cage.epsilon,
            sigma_minus=consts.sigma_minus, tau_plus=consts.tau_plus,
            tau_minus=consts.tau_minus, z0=z0,
            provenance={"cell": consts.method},
        )
    else:
        modes = [m for m in resonance.find_resonances(Curve.UNIT_CIRCLE, 0.1, 50.0)
                 if isinstance(m, resonance.CircleMode) and m.m == a and m.q == b]
        if not modes:
            _fail_config(f"circle mode m={a}, q={b} not found below k=50")
        mode = modes[0]
        st1 = cellsolve.cell_dirichlet_tilde(cage.wire_shape, cage.delta, 1)
        st2 = cellsolve.cell_dirichlet_tilde(cage.wire_shape, cage.delta, 2)
        I1, I2, I3 = resonance.mode_integrals_basic(mode)
        _, I4 = resonance.exterior_tilde_field(mode)
        _, I5, I6 = resonance.interior_particular_field(mode)
        if abs(z0) > 1.0:
            forcing = consts.tau_plus * resonance.source_integral_I7(mode, z0)
            kind = "exterior"
        else:
            forcing = resonance.interior_source_I8(mode, z0)
            kind = "interior"
        rep = resonance.second_order(
            mode, epsilon=cage.epsilon, sigma_minus=consts.sigma_minus,
            sigma_tilde_minus=st1, tau_plus=consts.tau_plus,
            tau_minus=consts.tau_minus, I1=I1, I2=I2, I3=I3, I4=I4, I5=I5,
            I6=I6, forcing=forcing, forcing_kind=kind,
            sigma_tilde_minus_model2=st2,
            provenance={"cell": consts.method, "I4": "closed-form",
                        "I5,I6,I7": "quadrature"},
        )
    rep.to_json(path)
    return path


def run_cell(args, out_dir=None):
    shape = _SHAPES.get(args.shape.lower())
    if shape is None:
        _fail_config(f"unknown shape {args.shape!r}")
    delta = args.delta
    out = {}
    grid_solution = None
    if args.bc == "dirichlet":
        if shape in (WireShape.PERPENDICULAR_SEGMENT, WireShape.TANGENTIAL_SEGMENT):
            consts = cellsolve.cell_dirichlet_analytic(shape, delta)
        else:
            grid_solution, consts = cellsolve.cell_dirichlet_numeric(shape, delta)
        out = {"sigma_plus": consts.sigma_plus, "sigma_minus": consts.sigma_minus,
               "tau_plus": consts.tau_plus, "tau_minus": consts.tau_minus,
               "a0": consts.a0, "method": consts.method}
        if shape == WireShape.DISK:
            out["sigma_tilde_model1"] = cellsolve.cell_dirichlet_tilde(shape, delta, 1)
            out["sigma_tilde_model2"] = cellsolve.cell_dirichlet_tilde(shape, delta, 2)
    else:
        grid_solution, lam = cellsolve.cell_neumann(shape, delta)
        out = {"lambda": lam}
        try:
            mu = cellsolve.cell_neumann_higher(shape, delta, args.model)
            out.update({"mu_tilde": mu[0], "mu_hat": mu[1], "mu_check": mu[2]})
        except NotImplementedError:
            pass
    if out_dir is not None and grid_solution is not None:
        path = Path(out_dir) / f"cell_{args.shape}_{delta:g}_{args.bc}.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        grid_solution.to_csv(path)
        out["grid_csv"] = str(path)
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(prog="cagecalc", description=__doc__)
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("sweep", "grid", "resonance"):
        p = sub.add_parser(name)
        p.add_argument("config")
    pc = sub.add_parser("cell")
    pc.add_argument("shape")
    pc.add_argument("delta", type=float)
    pc.add_argument("--bc", choices=("dirichlet", "neumann"), default="dirichlet")
    pc.add_argument("--model", type=int, choices=(1, 2), default=1)
    sub.add_parser("selftest")
    args = parser.parse_args(argv)

    def note(msg):
        if not args.quiet:
            print(msg)

    try:
        if args.command == "sweep":
            spec = _parse_sweep(_read_config(args.config), args.out, args.threads)
            csv_path, json_path = run_sweep(spec)
            note(f"wrote {csv_path} and {json_path}")
        elif args.command == "grid":
            path = run_grid(_read_config(args.config), args.out)
            note(f"wrote {path}")
        elif args.command == "resonance":
            path = run_resonance_report(_read_config(args.config), args.out)
            note(f"wrote {path}")
        elif args.command == "cell":
            return run_cell(args, args.out)
        elif args.command == "selftest":
            from .acceptance import run_all

            ok = run_all(quiet=args.quiet)
            return 0 if ok else 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SolverFailure, CageError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
