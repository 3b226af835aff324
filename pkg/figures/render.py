#!/usr/bin/env python3
"""Render publication-style figures from cagecalc CSV/JSON artifacts.

Usage:
    python3 figures/render.py <figure-spec.json>

The figure spec is a JSON object:

    {
      "kind": "ksweep" | "deltasweep" | "fieldmap" | "peaktracking",
      "input": "sweep.csv",             # CSV written by `cagecalc sweep/grid`
      "columns": ["discrete.0.abs_phi", "thin.0.abs_phi"],
      "markers": {"unperturbed": [2.40483], "shifted": [2.3764]},
      "quantity": "re_phi",             # fieldmap only
      "points": [{"x": 0.21, "input": "s1.json", "column": "..."}],  # peaktracking
      "title": "optional",
      "output": "figure.png"
    }

Sweep kinds draw one line per column (black = discrete, blue = thin,
green = thick, red = resonance) on a log amplitude axis, with vertical grey
dashed lines at unperturbed resonances and red dashed lines at shifted
ones.  Rows flagged by the solver arrive as NaN and are rendered as gaps.
Rendering is deterministic: rerunning on unchanged inputs reproduces the
file byte for byte.

Exit codes: 0 success, 2 bad spec / missing input or column.
"""

import json
import sys

import matplotlib
matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

MODEL_COLORS = {
    "discrete": "black",
    "thin": "tab:blue",
    "thick": "tab:green",
    "resonance": "tab:red",
    "neumann-shell": "tab:purple",
}

_SAVE_OPTS = dict(dpi=150, metadata={"Software": "figures/render.py"})


class SpecError(Exception):
    pass


def read_csv(path):
    """Read a cagecalc CSV: comment header, column names, float rows."""
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc}")
    rows = [ln for ln in lines if not ln.startswith("#")]
    names = rows[0].split(",")
    data = {}
    cols = list(zip(*[ln.split(",") for ln in rows[1:]]))
    for name, raw in zip(names, cols):
        try:
            data[name] = np.array([float(v) for v in raw])
        except ValueError:
            data[name] = np.array(raw)  # flag columns stay as text
    return data


def _column(data, name, path):
    if name not in data:
        raise SpecError(f"column {name!r} not found in {path}")
    return data[name]


def _model_color(column):
    return MODEL_COLORS.get(column.split(".")[0], "tab:orange")


def _draw_markers(ax, markers):
    for k in markers.get("unperturbed", []):
        ax.axvline(k, color="grey", linestyle="--", linewidth=0.9)
    for k in markers.get("shifted", []):
        ax.axvline(k, color="red", linestyle="--", linewidth=0.9)


def render_sweep(spec, xlabel):
    data = read_csv(spec["input"])
    x = _column(data, "value", spec["input"])
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    for col in spec["columns"]:
        y = _column(data, col, spec["input"]).astype(float)
        ax.plot(x, y, color=_model_color(col), label=col, linewidth=1.2)
    ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("amplitude")
    _draw_markers(ax, spec.get("markers", {}))
    ax.legend(loc="best", fontsize=8)
    if spec.get("title"):
        ax.set_title(spec["title"])
    fig.tight_layout()
    fig.savefig(spec["output"], **_SAVE_OPTS)
    plt.close(fig)


def render_fieldmap(spec):
    data = read_csv(spec["input"])
    quantity = spec.get("quantity", "re_phi")
    x = _column(data, "x", spec["input"])
    y = _column(data, "y", spec["input"])
    v = _column(data, quantity, spec["input"]).astype(float)
    xs, ys = np.unique(x), np.unique(y)
    grid = np.full((len(xs), len(ys)), np.nan)
    ix = np.searchsorted(xs, x)
    iy = np.searchsorted(ys, y)
    grid[ix, iy] = v
    fig, ax = plt.subplots(figsize=(5.4, 4.6))
    masked = np.ma.masked_invalid(grid.T)
    mesh = ax.pcolormesh(xs, ys, masked, shading="nearest", cmap="RdBu_r")
    fig.colorbar(mesh, ax=ax, label=quantity)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if spec.get("title"):
        ax.set_title(spec["title"])
    fig.tight_layout()
    fig.savefig(spec["output"], **_SAVE_OPTS)
    plt.close(fig)


def render_peaktracking(spec):
    xs, ys = [], []
    for point in spec["points"]:
        if "value" in point:
            val = point["value"]
        else:
            with open(point["input"]) as fh:
                summary = json.load(fh)
            try:
                val = summary["columns"][point["column"]]["max"]
            except KeyError:
                raise SpecError(
                    f"column {point['column']!r} not found in {point['input']}")
        xs.append(point["x"])
        ys.append(val)
    order = np.argsort(xs)
    xs, ys = np.asarray(xs)[order], np.asarray(ys)[order]
    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    ax.loglog(xs, ys, "ko-", markersize=4)
    ax.set_xlabel(spec.get("xlabel", "epsilon"))
    ax.set_ylabel("peak amplitude")
    if spec.get("title"):
        ax.set_title(spec["title"])
    fig.tight_layout()
    fig.savefig(spec["output"], **_SAVE_OPTS)
    plt.close(fig)


def render(spec):
    kind = spec.get("kind", "").lower()
    if kind == "ksweep":
        render_sweep(spec, "wavenumber k")
    elif kind == "deltasweep":
        render_sweep(spec, "scaled radius delta")
    elif kind == "fieldmap":
        render_fieldmap(spec)
    elif kind == "peaktracking":
        render_peaktracking(spec)
    else:
        raise SpecError(f"unknown figure kind {spec.get('kind')!r}")
    return spec["output"]


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print(__doc__, file=sys.stderr)
        return 2
    try:
        with open(argv[0]) as fh:
            spec = json.load(fh)
        out = render(spec)
    except (SpecError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"figure error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
