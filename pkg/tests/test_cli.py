from __future__ import annotations

import json

import jsonschema
import pytest

from symcocycle import suites
from symcocycle.cli import main
from symcocycle.suites import REPORT_SCHEMA, Case, Scenario, run_disk_experiment, run_suite


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval_heisenberg(capsys):
    code, out, _ = run_cli(capsys, "eval", "heisenberg", "--x", "1,0", "--y", "0,1")
    assert code == 0
    assert out.splitlines()[0] == "C = 0.5"


def test_eval_heisenberg_identity_first(capsys):
    code, out, _ = run_cli(capsys, "eval", "heisenberg", "--x", "0,0", "--y", "3,4")
    assert code == 0 and float(out.splitlines()[0].split("=")[1]) == 0.0


def test_eval_h2_prints_decomposition(capsys):
    code, out, _ = run_cli(capsys, "eval", "h2", "--g1", "1,1,0,1", "--g2", "2,0,0,0.5")
    assert code == 0
    vals = dict(line.split(" = ", 1) for line in out.splitlines() if " = " in line)
    assert abs(float(vals["C"]) - float(vals["gw - D gamma"])) < 1e-7


def test_eval_disk_twists(capsys):
    code, out, _ = run_cli(capsys, "eval", "disk", "--g1", "bump:0.1,0,0.6,1", "--g2", "bump:0,0.1,0.5,-1",
                           "--basepoint", "0.3,0")
    assert code == 0 and out.startswith("C = ")


@pytest.mark.parametrize("argv", [
    ("eval", "heisenberg", "--x", "1,a", "--y", "0,1"),
    ("eval", "h2", "--g1", "1,2,3", "--g2", "1,0,0,1"),
    ("eval", "disk", "--g1", "wobble:1", "--g2", "poly:1"),
    ("verify", "--model", "sphere"),
    ("verify", "--model", "r2n:1", "--samples", "0"),
    ("verify", "--model", "r2n:1", "--tol", "nonsense=1"),
    ("verify",),
    ("disk-experiment", "--words", "3"),
    ("frobnicate",),
])
def test_usage_errors(capsys, argv):
    assert run_cli(capsys, *argv)[0] == 2


def test_verify_r2n_passes(capsys):
    code, out, _ = run_cli(capsys, "verify", "--model", "r2n:1", "--seed", "42")
    report = json.loads(out)
    assert code == 0
    assert report["summary"]["fail"] == 0 and report["summary"]["error"] == 0
    ids = {c["id"]: c for c in report["cases"]}
    assert ids["heisenberg.closed_form"]["tolerance"] == 1e-9
    assert ids["heisenberg.closed_form"]["status"] == "pass"


def test_verify_torus_passes(capsys):
    code, out, _ = run_cli(capsys, "verify", "--model", "torus", "--seed", "1")
    assert code == 0
    assert {c["id"] for c in json.loads(out)["cases"]} >= {"torus.b_unit", "torus.b_hamiltonian"}


def test_failure_exit_code_and_out_file(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, _, err = run_cli(capsys, "verify", "--model", "r2n:1", "--tol", "heisenberg=1e-300",
                           "--out", str(path), "--csv")
    assert code == 1 and "FAIL heisenberg.closed_form" in err
    report = json.loads(path.read_text())
    jsonschema.validate(report, REPORT_SCHEMA)
    assert report["summary"]["fail"] == 1
    assert path.with_suffix(".csv").read_text().startswith("id,status,")


def test_config_file_and_flag_override(capsys, tmp_path):
    cfg = tmp_path / "scenario.txt"
    cfg.write_text("# scenario\nmodel = r2n:2\nseed = 5\nsamples = 3\ntol.heisenberg = 1e-300\n")
    code, out, _ = run_cli(capsys, "verify", "--config", str(cfg), "--tol", "heisenberg=1e-9")
    report = json.loads(out)
    assert code == 0
    assert report["scenario"]["model"] == "r2n:2" and report["scenario"]["samples"] == 3
    assert report["scenario"]["tolerances"] == {"heisenberg": 1e-9}


def test_bad_config_is_usage_error(capsys, tmp_path):
    cfg = tmp_path / "bad.txt"
    cfg.write_text("colour = blue\n")
    assert run_cli(capsys, "verify", "--config", str(cfg))[0] == 2


def test_report_schema_verb(capsys):
    code, out, _ = run_cli(capsys, "report-schema")
    schema = json.loads(out)
    assert code == 0 and schema["properties"]["schema_version"]["const"] == 1
    jsonschema.Draft202012Validator.check_schema(schema)


def test_reports_validate_against_schema():
    for model in ("r2n:1", "product:r2n:1,r2n:1", "torus"):
        jsonschema.validate(run_suite(Scenario(model, seed=3, samples=2)).to_json(), REPORT_SCHEMA)


def test_cases_are_order_independent():
    # each case draws from its own stream, so dropping other cases does not change it
    full = {c.id: c.to_json() for c in run_suite(Scenario("r2n:1", seed=9, samples=3)).cases}
    saved = list(suites._CASES)
    try:
        suites._CASES[:] = [c for c in saved if c[0] == "heisenberg.closed_form"]
        alone = run_suite(Scenario("r2n:1", seed=9, samples=3)).cases
    finally:
        suites._CASES[:] = saved
    assert alone[0].to_json() == full["heisenberg.closed_form"]


def test_numeric_failure_is_reported_as_error(monkeypatch):
    def boom(ctx):
        raise ArithmeticError("synthetic failure")

    monkeypatch.setattr(suites, "_CASES", suites._CASES + [("zz.boom", ("r2n",), boom)])
    report = run_suite(Scenario("r2n:1", samples=2))
    assert report.exit_code == 3
    bad = [c for c in report.cases if c.id == "zz.boom"][0]
    assert bad.status == "error" and "synthetic failure" in bad.message
    assert report.summary["pass"] > 0


def test_case_comparisons():
    assert Case("a", 0.5, 1.0).status == "pass"
    assert Case("a", -2.0, 1.0).status == "fail"
    assert Case("a", 0.5, 0.01, comparison=">").status == "pass"
    assert Case("a", 3.0, comparison="info").status == "info"


def test_disk_experiment_is_info_only():
    report = run_disk_experiment(seed=2, words=4, depth=3)
    statuses = {c.id: c.status for c in report.cases}
    assert statuses["disk_experiment.positive_control"] == "pass"
    assert statuses["disk_experiment.negative_control"] == "pass"
    twist = [c for c in report.cases if c.id.startswith("disk_experiment.twists")]
    assert len(twist) == 3 and all(c.status == "info" and c.tolerance is None for c in twist)
    assert all(c.values["conclusion"] == "none" for c in twist)
    assert all(c.values["equations"] > c.values["rank"] for c in twist)


def test_scenario_validation():
    with pytest.raises(ValueError):
        Scenario("r2n:1", samples=0)
    with pytest.raises(ValueError):
        Scenario("r2n:1", seed=-1)
    with pytest.raises(ValueError):
        Scenario("klein-bottle")
