from __future__ import annotations

import io
import json
import subprocess
import sys

import pytest

from qtop.cli import EXIT_CHECK, EXIT_INPUT, EXIT_MATH, EXIT_USAGE, run
from qtop.compare import corpus_graph


def _run(argv):
    out = io.StringIO()
    code = run(argv, out)
    text = out.getvalue()
    return code, (json.loads(text) if text else None), text


@pytest.fixture
def graphs(tmp_path):
    paths = {}
    for name in ("s3", "lens5", "chain23"):
        path = tmp_path / f"{name}.json"
        path.write_text(corpus_graph(name).to_json())
        paths[name] = str(path)
    return paths


def test_repdata_r6():
    code, data, _ = _run(["repdata", "--r", "6"])
    assert code == 0
    assert data["rbar"] == 6 and data["zeta"] == -3
    assert data["kirby_index_set"] == [-5, -3, -1]
    assert data["brute_force_agrees"] and data["zeta_equals_product"]


def test_zhat_s3_sl2(graphs):
    code, data, _ = _run(["zhat", "--graph", graphs["s3"], "--order", "10", "--algebra", "sl2"])
    assert code == 0
    assert data["spinc"][0]["series"] == {"delta": "-1/2", "coeffs": [["0/1", "-2/1"], ["1/1", "2/1"]]}


def test_zhat_root_eval_and_label_choice(graphs):
    code, data, _ = _run(["zhat", "--graph", graphs["chain23"], "--order", "5", "--r", "7", "--spinc", "1"])
    assert code == 0 and len(data["spinc"]) == 1
    assert set(data["spinc"][0]["root_eval"]) == {"re", "im"}
    assert _run(["zhat", "--graph", graphs["chain23"], "--order", "5", "--spinc", "9"])[0] == EXIT_INPUT


def test_check_gauss_r8():
    code, data, _ = _run(["check", "gauss", "--r", "8", "--max-dim", "2"])
    assert code == 0 and data["pass"] and data["cases"] > 0


def test_cgp_with_omega_file(graphs, tmp_path):
    om = tmp_path / "omega.json"
    om.write_text(json.dumps({"modulus": 2, "alpha": ["-2/5"]}))
    code, data, _ = _run(["cgp", "--r", "7", "--graph", graphs["lens5"], "--omega", str(om)])
    assert code == 0
    (res,) = data["results"]
    assert res["omega"]["alpha"] == ["-2/5"]
    assert "exact" in res
    om.write_text(json.dumps({"cycle": [1]}))
    assert _run(["cgp", "--r", "7", "--graph", graphs["lens5"], "--omega", str(om)])[0] == 0


def test_verlinde_limits_and_value():
    code, data, _ = _run(["verlinde", "--r", "8", "--genus", "2"])
    assert code == 0 and data["pass"]
    code, data, _ = _run(["verlinde", "--r", "6", "--genus", "1", "--lambda", "1/7"])
    assert code == 0 and abs(data["value"]["re"] - 3) < 1e-12


def test_exit_codes(graphs, tmp_path):
    assert _run([])[0] == EXIT_USAGE
    assert _run(["cgp", "--graph", graphs["lens5"]])[0] == EXIT_USAGE
    assert _run(["frobnicate"])[0] == EXIT_USAGE
    assert _run(["cgp", "--r", "7", "--graph", str(tmp_path / "missing.json")])[0] == EXIT_INPUT
    bad = tmp_path / "cycle.json"
    bad.write_text(json.dumps({"vertices": [{"id": i, "framing": -2} for i in range(3)], "edges": [[0, 1], [1, 2], [2, 0]]}))
    assert _run(["cgp", "--r", "7", "--graph", str(bad)])[0] == EXIT_INPUT
    om = tmp_path / "s3_omega.json"
    om.write_text(json.dumps({"modulus": 2, "alpha": ["-2/5"]}))
    assert _run(["cgp", "--r", "7", "--graph", graphs["s3"], "--omega", str(om)])[0] == EXIT_INPUT
    assert _run(["repdata", "--r", "4"])[0] == EXIT_MATH
    assert _run(["repdata", "--r", "12"])[0] == EXIT_MATH
    assert _run(["check", "cgp-vs-zhat", "--r", "11", "--graph", graphs["chain23"]])[0] == EXIT_MATH
    assert _run(["verlinde", "--r", "5", "--genus", "2", "--lambda", "1/4"])[0] == EXIT_MATH


def test_failed_check_exit_code(graphs):
    code, data, _ = _run(["check", "cgp-vs-zhat", "--r", "7", "--graph", graphs["lens5"], "--tolerance", "-1"])
    assert code == EXIT_CHECK and not data["pass"]


def test_output_is_deterministic_and_can_go_to_file(graphs, tmp_path):
    argv = ["cgp", "--r", "7", "--graph", graphs["chain23"], "--backend", "float"]
    first, second = _run(argv)[2], _run(argv)[2]
    assert first == second
    target = tmp_path / "out.json"
    assert run(argv + ["--output", str(target)], io.StringIO()) == 0
    assert target.read_text() == first


def test_console_entry_point(graphs):
    proc = subprocess.run(
        [sys.executable, "-m", "qtop.cli", "zhat", "--graph", graphs["s3"], "--order", "3", "--algebra", "osp"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["spinc"][0]["series"]["coeffs"] == [["0/1", "2/1"], ["1/1", "2/1"]]
