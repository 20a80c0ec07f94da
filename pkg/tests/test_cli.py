"""Command-line front end: subcommand plumbing, report shape, exit codes."""

import json

import pytest

from cbsforge import Hypermatrix
from cbsforge.cbs import CbsInput, save_cbs_input
from cbsforge.cli import main


def _run(argv, tmp_path, name="report.json"):
    out = tmp_path / name
    code = main(argv + ["--out", str(out)])
    return code, json.loads(out.read_text())


def test_verify_lagrange(tmp_path):
    code, rep = _run(["verify-lagrange", "--trials", "4", "--seed", "1"], tmp_path)
    assert code == 0
    assert rep["schema"] == 1 and rep["tool"] == "cbsforge"
    assert rep["aggregate"]["total"] == 8  # complex + exact per trial
    assert rep["aggregate"]["failed"] == 0
    kinds = {t["kind"] for t in rep["trials"]}
    assert kinds == {"complex", "exact"}


def test_verify_invariance_single_law(tmp_path):
    code, rep = _run(["verify-invariance", "--law", "unitary", "--trials", "5"], tmp_path)
    assert code == 0
    assert all(t["law"] == "unitary" for t in rep["trials"])


def test_eval_phi_round_trip(tmp_path):
    inp = CbsInput(xs=(Hypermatrix((2,), [1, 2]),), us=(Hypermatrix((2,), [3, 4]),))
    path = tmp_path / "input.json"
    save_cbs_input(inp, path)
    code, rep = _run(["eval-phi", "--input", str(path)], tmp_path)
    assert code == 0
    assert rep["trials"][0]["breakdown"]["total"] == 4.0
    assert len(rep["input_sha256"]) == 64


def test_oracle_check_and_failure_exit(tmp_path):
    code, rep = _run(["oracle-check", "--dims", "2", "2,2", "--trials", "3"], tmp_path)
    assert code == 0 and rep["aggregate"]["total"] == 6
    # an impossible tolerance must flip the exit code and list the trial
    code, rep = _run(["oracle-check", "--dims", "2", "--trials", "2",
                      "--tol", "0"], tmp_path, "fail.json")
    assert code == 1 and rep["aggregate"]["failed"] > 0


def test_werner_check(tmp_path):
    code, rep = _run(["werner-check", "--d", "2", "3", "--grid-points", "11"], tmp_path)
    assert code == 0
    assert rep["aggregate"]["total"] == 22


def test_search_report(tmp_path):
    code, rep = _run(["search", "--dims", "2,2", "--n", "2", "--restarts", "3",
                      "--iters", "100", "--seed", "5"], tmp_path)
    assert code == 0
    trial = rep["trials"][0]
    assert trial["asserted"] is False  # open-conjecture probes never gate
    assert trial["best_value"] == trial["reevaluated"]
    assert not trial["candidate"]


def test_integral_families(tmp_path):
    code, rep = _run(["integral", "power", "--trials", "10", "--dual", "1",
                      "--grid-points", "512"], tmp_path)
    assert code == 0
    kinds = [t.get("kind", "closed") for t in rep["trials"]]
    assert kinds.count("dual-path") == 1
    # explicit parameter file evaluates that block (all-ones -> 4)
    pfile = tmp_path / "params.json"
    pfile.write_text(json.dumps({"a": [[1, 1], [1, 1]], "b": [[1, 1], [1, 1]]}))
    code, rep = _run(["integral", "power", "--params", str(pfile)], tmp_path,
                     "params_report.json")
    assert code == 0 and rep["trials"][0]["value"] == pytest.approx(4.0)
    code, rep = _run(["integral", "quadrature"], tmp_path, "quad.json")
    assert code == 0
    errs = [t["error"] for t in rep["trials"]]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_suite_quick(tmp_path, capsys):
    code, rep = _run(["suite", "--quick", "--seed", "7"], tmp_path)
    assert code == 0
    assert rep["aggregate"]["asserted"] == 10  # criterion 9 is report-only
    assert rep["aggregate"]["report_only"] == 1
    numbers = [t["criterion"] for t in rep["trials"]]
    assert numbers == list(range(1, 12))


def test_unknown_flag_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["suite", "--bogus"])
    assert exc.value.code == 2


def test_missing_subcommand_usage_error():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
