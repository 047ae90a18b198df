import json
import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest

from isowreath.cli import ValidationError, export_obj, obj_text, report_json, run
from isowreath.fields import read_csv

SCENES = Path(__file__).resolve().parent.parent / "scenes"
SMALL = "-1,-1,0.125,0.125,17,17"


def test_curvature_paraboloid_stdout(capsys):
    assert run(["curvature", "--f", "(2*u^2+3*v^2)/2", "--grid", SMALL]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "-1.0,-1.0,0.125,0.125,17,17"
    assert {float(x) for row in lines[1:] for x in row.split(",")} == {6.0}


def test_leading_minus_values(capsys):
    assert run(["curvature", "--f", "-(u^2+v^2)/2", "--grid", SMALL, "--quantity", "H"]) == 0
    assert {float(x) for row in capsys.readouterr().out.splitlines()[1:] for x in row.split(",")} == {-1.0}


def test_curvature_all(tmp_path):
    assert run(["curvature", "--f", "(2*u^2+3*v^2)/2", "--grid", SMALL, "--quantity", "all", "--out", str(tmp_path)]) == 0
    assert np.all(read_csv(tmp_path / "H.csv").values == 2.5)
    assert np.all(read_csv(tmp_path / "kappa1.csv").values == 2.0)


def test_curvature_from_csv(tmp_path):
    src = tmp_path / "f.csv"
    assert run(["curvature", "--f", "(2*u^2+3*v^2)/2", "--quantity", "H", "--grid", SMALL, "--out", str(src)]) == 0
    out = tmp_path / "K.csv"
    # the sampled H field is constant, so its K vanishes
    assert run(["curvature", "--csv", str(src), "--out", str(out)]) == 0
    K = read_csv(out)
    assert K.grid.nu == 13 and np.max(np.abs(K.values)) < 1e-10


def test_wreath_outputs(tmp_path):
    assert run(["wreath", "--f", "(u^2+v^2)/2", "--n", "u*v", "--grid", "-1,-1,0.0625,0.0625,33,33", "--out", str(tmp_path)]) == 0
    for name in ("F", "V", "C", "Cbar", "B", "Bbar"):
        assert (tmp_path / f"{name}.obj").exists()
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["ok"] and rep["max_residual"] < 1e-8


@pytest.mark.parametrize("name", ["assoc", "bour", "parabolic", "minding", "split", "wreath"])
def test_scenes_run(name, tmp_path):
    scene = SCENES / f"{name}.json"
    if name == "wreath":
        argv = ["wreath", str(scene)]
    else:
        argv = ["family", name, str(scene)]
    assert run(argv + ["--out", str(tmp_path)]) == 0


def test_discrete_scene(tmp_path):
    assert run(["discrete", "flex", str(SCENES / "voss.json"), "--t", "0.5,2", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "flex_t2.obj").exists()


def test_discrete_without_scene_is_usage_error(capsys):
    assert run(["discrete", "flex", "--t", "2", "scene.json"]) == 2
    assert run(["discrete", "flex", "--t", "2"]) == 2
    assert "usage error" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["curvature", "--f", "u +"],
        ["curvature", "--f", "u*v", "--grid", "1,2,3"],
        ["dual", "--f", "u*v", "--map", "gamma"],
        ["family", "assoc", "/nonexistent/scene.json"],
    ],
)
def test_usage_errors(argv):
    assert run(argv) == 2


def test_validation_errors(tmp_path):
    # log(u) has a domain error on [-1, 1]
    assert run(["curvature", "--f", "log(u)", "--grid", SMALL]) == 1
    # non-flexible pair
    assert run(["wreath", "--f", "(u^2+v^2)/2", "--n", "u^2", "--grid", SMALL, "--out", str(tmp_path)]) == 1


def test_nan_vertex_exit_1(tmp_path):
    scene = tmp_path / "net.json"
    X = np.zeros((3, 3, 3))
    X[..., 0], X[..., 1] = np.meshgrid(np.arange(3.0), np.arange(3.0), indexing="ij")
    data = {"net": {"nu": 3, "nv": 3, "vertices": X.reshape(-1).tolist()}}
    data["net"]["vertices"][4] = "NaN"
    scene.write_text(json.dumps(data).replace('"NaN"', "NaN"))
    assert run(["discrete", "check", str(scene), "--out", str(tmp_path / "o")]) == 1


def test_threads_env(monkeypatch):
    monkeypatch.setenv("ISOWREATH_THREADS", "zero")
    assert run(["verify"]) == 2
    monkeypatch.setenv("ISOWREATH_THREADS", "2")
    assert run(["curvature", "--f", "u*v", "--grid", SMALL, "--out", "/dev/null"]) == 0


class TestExport:
    def test_obj_2x2(self, tmp_path):
        P = np.array([[[0, 0, 0], [0, 1, 0]], [[1, 0, 0], [1, 1, 0.5]]], dtype=float)
        path = export_obj(P, tmp_path / "m.obj")
        lines = path.read_text().splitlines()
        assert sum(ln.startswith("v ") for ln in lines) == 4
        assert [ln for ln in lines if ln.startswith("f ")] == ["f 1 3 4", "f 1 4 2"]
        side = json.loads((tmp_path / "m.obj.quads.json").read_text())
        assert side["quads"] == [[1, 3, 4, 2]]

    def test_obj_full_precision(self):
        text, _ = obj_text(np.full((2, 2, 3), 0.1))
        assert text.splitlines()[0] == "v 0.10000000000000001 0.10000000000000001 0.10000000000000001"

    def test_obj_nan(self, tmp_path):
        P = np.zeros((2, 2, 3))
        P[0, 0, 2] = np.nan
        with pytest.raises(ValidationError):
            export_obj(P, tmp_path / "bad.obj")

    def test_report_round_trip(self, tmp_path):
        rep = {"residuals": {"a": np.float64(1e-12), "b": 3}, "ok": np.bool_(True), "arr": np.arange(3)}
        report_json(rep, tmp_path / "r.json")
        back = json.loads((tmp_path / "r.json").read_text())
        assert back == {"residuals": {"a": 1e-12, "b": 3}, "ok": True, "arr": [0, 1, 2]}


def test_deterministic_output(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(["wreath", str(SCENES / "wreath.json"), "--seed", "3", "--out", str(d)]) == 0
    for f in sorted(a.iterdir()):
        assert f.read_bytes() == (b / f.name).read_bytes(), f.name


def test_verify(capsys):
    assert run(["verify"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 13 and all("PASS" in ln for ln in out)


@pytest.mark.skipif(shutil.which("isowreath") is None, reason="console script not installed")
def test_console_script():
    r = subprocess.run(["isowreath", "curvature", "--f", "u*v", "--grid", SMALL], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.splitlines()[1].startswith("-1.0")
    r = subprocess.run(["isowreath", "nope"], capture_output=True, text=True)
    assert r.returncode == 2 and r.stderr
