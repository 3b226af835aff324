"""Figure scripts consume only CLI artifacts; rendering is checksum-stable."""

import hashlib
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

RENDER = Path(__file__).parent / "render.py"


def run_render(spec_path):
    return subprocess.run([sys.executable, str(RENDER), str(spec_path)],
                          capture_output=True, text=True)


def fake_sweep_csv(path):
    """A small k-sweep CSV in the cagecalc format, with a flagged gap."""
    ks = np.linspace(2.2, 2.6, 41)
    disc = 0.1 + 2.0 / (1.0 + ((ks - 2.376) / 0.002) ** 2)
    thick = 0.05 + 0.1 * np.abs(ks - 2.405)
    lines = ["# config-hash=deadbeef",
             "value,discrete.0.abs_phi,thick.0.abs_phi,thick.flag"]
    for i, k in enumerate(ks):
        flag = "NearResonance" if abs(k - 2.405) < 0.02 else ""
        tv = "nan" if flag else f"{thick[i]:.12g}"
        lines.append(f"{k:.12g},{disc[i]:.12g},{tv},{flag}")
    path.write_text("\n".join(lines) + "\n")


def test_ksweep_render_and_checksum(tmp_path):
    csv = tmp_path / "sweep.csv"
    fake_sweep_csv(csv)
    spec = {
        "kind": "ksweep",
        "input": str(csv),
        "columns": ["discrete.0.abs_phi", "thick.0.abs_phi"],
        "markers": {"unperturbed": [2.40483], "shifted": [2.3764]},
        "output": str(tmp_path / "fig.png"),
    }
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec))
    res = run_render(spec_path)
    assert res.returncode == 0, res.stderr
    first = hashlib.sha256((tmp_path / "fig.png").read_bytes()).hexdigest()
    res = run_render(spec_path)
    assert res.returncode == 0
    second = hashlib.sha256((tmp_path / "fig.png").read_bytes()).hexdigest()
    assert first == second
    assert (tmp_path / "fig.png").stat().st_size > 10000


def test_missing_column_exit_code(tmp_path):
    csv = tmp_path / "sweep.csv"
    fake_sweep_csv(csv)
    spec = {
        "kind": "ksweep",
        "input": str(csv),
        "columns": ["no.such.column"],
        "output": str(tmp_path / "fig.png"),
    }
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec))
    res = run_render(spec_path)
    assert res.returncode == 2
    assert "no.such.column" in res.stderr


def test_empty_marker_spec(tmp_path):
    csv = tmp_path / "sweep.csv"
    fake_sweep_csv(csv)
    spec = {
        "kind": "ksweep",
        "input": str(csv),
        "columns": ["discrete.0.abs_phi"],
        "output": str(tmp_path / "fig.png"),
    }
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec))
    assert run_render(spec_path).returncode == 0


def test_fieldmap_with_nan_holes(tmp_path):
    csv = tmp_path / "grid.csv"
    lines = ["# config-hash=feedface", "x,y,re_phi,im_phi,abs_phi"]
    xs = np.linspace(-1, 1, 15)
    for x in xs:
        for y in xs:
            if x * x + y * y < 0.04:
                lines.append(f"{x:.6g},{y:.6g},nan,nan,nan")
            else:
                v = np.cos(3 * x) * np.sin(2 * y)
                lines.append(f"{x:.6g},{y:.6g},{v:.6g},0,{abs(v):.6g}")
    csv.write_text("\n".join(lines) + "\n")
    spec = {
        "kind": "fieldmap",
        "input": str(csv),
        "quantity": "re_phi",
        "output": str(tmp_path / "map.png"),
    }
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec))
    res = run_render(spec_path)
    assert res.returncode == 0, res.stderr


def test_peaktracking(tmp_path):
    points = []
    for i, (eps, peak) in enumerate([(0.1, 20.0), (0.2, 10.0), (0.4, 5.0)]):
        summary = tmp_path / f"s{i}.json"
        summary.write_text(json.dumps(
            {"columns": {"discrete.0.abs_phi": {"argmax": 2.37, "max": peak}}}))
        points.append({"x": eps, "input": str(summary),
                       "column": "discrete.0.abs_phi"})
    spec = {
        "kind": "peaktracking",
        "input": "",
        "points": points,
        "output": str(tmp_path / "peaks.png"),
    }
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec))
    res = run_render(spec_path)
    assert res.returncode == 0, res.stderr


def test_unknown_kind(tmp_path):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps({"kind": "pie", "output": "x.png"}))
    assert run_render(spec_path).returncode == 2
