import json

import numpy as np
import pytest
from click.testing import CliRunner

from ocrskit.cli import main


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def hard2k(tmp_path):
    path = tmp_path / "hard2k.json"
    path.write_text(json.dumps({"x": [0.5] * 8, "k": 4}))
    return str(path)


@pytest.fixture
def exp_dists(tmp_path):
    path = tmp_path / "exp.json"
    path.write_text(json.dumps([{"kind": "exponential", "rate": 1.0, "copies": 40}]))
    return str(path)


def _rows(text):
    lines = [l for l in text.strip().split("\n") if not l.startswith("#")]
    header = lines[0].split(",")
    return header, [dict(zip(header, l.split(","))) for l in lines[1:]]


def test_bounds_k1(runner):
    res = runner.invoke(main, ["bounds", "--k", "1", "--seed", "0"])
    assert res.exit_code == 0
    header, rows = _rows(res.output)
    assert header == ["k", "c_star", "a_star", "envelope", "curve_eq4", "hks_bc",
                      "greedy_frontier", "ocrs_bound"]
    assert rows[0]["c_star"] == "0.5"


def test_selectability_hard_instance(runner, hard2k):
    res = runner.invoke(
        main,
        ["selectability", "--scheme", "greedy", "--k", "4", "--instance", hard2k,
         "--order", "identity", "--seed", "0"],
    )
    assert res.exit_code == 0
    header, rows = _rows(res.output)
    assert header == ["element_index", "method", "p_cond", "stderr", "bound", "pass"]
    assert float(rows[-1]["p_cond"]) == 0.5


def test_selectability_config_header(runner, hard2k):
    res = runner.invoke(
        main,
        ["selectability", "--scheme", "simple", "--instance", hard2k, "--seed", "3"],
    )
    assert res.exit_code == 0
    first = res.output.split("\n")[0]
    assert first.startswith("# config: ")
    cfg = json.loads(first[len("# config: "):])
    assert cfg["subcommand"] == "selectability" and cfg["seed"] == 3


def test_rerun_byte_identical(runner, hard2k, tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["selectability", "--scheme", "simple", "--instance", hard2k,
            "--method", "mc", "--trials", "5000", "--seed", "9"]
    assert runner.invoke(main, args + ["--out", str(out1)]).exit_code == 0
    assert runner.invoke(main, args + ["--out", str(out2)]).exit_code == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert b"\r" not in out1.read_bytes()


def test_jsonl_format(runner, hard2k):
    res = runner.invoke(
        main,
        ["selectability", "--scheme", "greedy", "--instance", hard2k, "--seed", "0",
         "--format", "jsonl"],
    )
    assert res.exit_code == 0
    lines = res.output.strip().split("\n")
    assert lines[0].startswith("# config: ")
    row = json.loads(lines[1])
    assert row["element_index"] == 0 and row["pass"] is True


def test_missing_seed_is_an_error(runner, hard2k):
    res = runner.invoke(main, ["selectability", "--scheme", "greedy", "--instance", hard2k])
    assert res.exit_code != 0


def test_input_error_exit_code(runner, tmp_path):
    res = runner.invoke(
        main,
        ["selectability", "--scheme", "greedy", "--instance", str(tmp_path / "nope.json"),
         "--seed", "0"],
    )
    assert res.exit_code == 1
    res = runner.invoke(
        main, ["selectability", "--scheme", "wat", "--instance", "x", "--seed", "0"]
    )
    assert res.exit_code == 1


def test_actives_first_refused_for_guarantee_schemes(runner, hard2k):
    res = runner.invoke(
        main,
        ["selectability", "--scheme", "simple", "--instance", hard2k,
         "--order", "actives-first", "--seed", "0"],
    )
    assert res.exit_code == 1


def test_infeasible_instance_exit(runner, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"x": [0.9, 0.9], "k": 1}))
    res = runner.invoke(
        main, ["selectability", "--scheme", "greedy", "--instance", str(bad), "--seed", "0"]
    )
    assert res.exit_code == 1


def test_prophet_subcommand(runner, exp_dists):
    res = runner.invoke(
        main,
        ["prophet", "--dists", exp_dists, "--k", "20", "--scheme", "simple",
         "--trials", "2000", "--seed", "1"],
    )
    assert res.exit_code == 0
    header, rows = _rows(res.output)
    assert header == ["scheme", "k", "trials", "ratio", "ci_low", "ci_high", "floor", "pass"]
    assert rows[0]["pass"] == "true"
    assert 0.5 < float(rows[0]["ratio"]) <= 1.0


def test_walk_check_subcommand(runner, tmp_path):
    out = tmp_path / "walk.csv"
    res = runner.invoke(
        main,
        ["walk-check", "--k", "16", "--d", "4", "--trials", "2000", "--seed", "2",
         "--out", str(out)],
    )
    assert res.exit_code == 0
    assert "pass" in res.output
    header, rows = _rows(out.read_text())
    assert header == ["m", "discard_prob", "bound", "stderr"]
    assert len(rows) == 32


def test_oracle_compare_subcommand(runner):
    res = runner.invoke(main, ["oracle-compare", "--cases", "25", "--seed", "4"])
    assert res.exit_code == 0
    header, rows = _rows(res.output)
    assert all(r["pass"] == "true" for r in rows)
    assert all(float(r["max_abs_diff"]) <= 1e-9 for r in rows)
