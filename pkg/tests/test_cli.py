import json
import math
from fractions import Fraction

import numpy as np
import pytest

from rigidity_lab.cli import (EXIT_BUDGET, EXIT_OK, EXIT_PRECONDITION, EXIT_REFUTED, EXIT_USAGE,
                              main)
from rigidity_lab.manifolds import model_from_id
from rigidity_lab.suite import run_suite, small_lemma_check


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_rbar_example(capsys):
    code, out = _run(capsys, "rbar", "--model", "e2", "--r", "1", "--tol", "1e-6")
    assert code == EXIT_OK
    doc = json.loads(out)
    lo, hi = doc["rbar"]
    assert lo <= math.sqrt(3) <= hi and hi - lo <= 1e-6
    assert doc["schema"] == "rigidity-lab/v1" and doc["config"]["model"] == "e2"


def test_outputs_are_byte_identical(capsys):
    argv = ["rbar", "--model", "s2", "--r", "pi/8"]
    assert _run(capsys, *argv) == _run(capsys, *argv)
    argv = ["counterexample", "run", "--id", "ex1", "--r", "sqrt2", "--pairs", "200"]
    assert _run(capsys, *argv) == _run(capsys, *argv)


def test_intersect(capsys):
    code, out = _run(capsys, "intersect", "--model", "e2", "--x1", "0,0", "--r1", "1",
                     "--x2", "1.5,0", "--r2", "1")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["predicate"] is True and doc["nonempty"] is True


def test_intersect_beyond_conv_has_no_predicate(capsys):
    code, out = _run(capsys, "intersect", "--model", "s2", "--x1", "north", "--r1", "2",
                     "--x2", "south", "--r2", "1.5")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["predicate"] is None and doc["nonempty"] is False
    assert "note" in doc


def test_classify(capsys):
    code, out = _run(capsys, "classify", "--model", "e2", "--x1", "0,0", "--r1", "1",
                     "--x2", "2,0", "--r2", "1")
    assert code == EXIT_OK and json.loads(out)["class"] == "singleton"


def test_classify_precondition_exit(capsys):
    code, _ = _run(capsys, "classify", "--model", "s2", "--x1", "north", "--r1", "2",
                   "--x2", "south", "--r2", "1.5")
    assert code == EXIT_PRECONDITION


def test_lens_profile_formats(capsys, tmp_path):
    code, out = _run(capsys, "lens-profile", "--model", "e2", "--r", "1", "--samples", "4",
                     "--format", "csv", "--budget", "16")
    rows = out.splitlines()
    assert code == EXIT_OK and rows[0] == "t,g_estimate,error_bound" and len(rows) == 7
    target = tmp_path / "g.svg"
    code, out = _run(capsys, "lens-profile", "--model", "s2", "--r", "0.6", "--samples", "4",
                     "--format", "svg", "--output", str(target))
    assert code == EXIT_OK and out == ""
    assert target.read_text().startswith("<svg")
    code, out = _run(capsys, "lens-profile", "--model", "t2", "--r", "0.1", "--samples", "4")
    doc = json.loads(out)
    assert doc["violations"] == [] and len(doc["samples"]) == 6


def test_derive_and_verify_round_trip(capsys, tmp_path):
    cert = tmp_path / "cert.json"
    code, _ = _run(capsys, "closure", "derive", "--seeds", "1,sqrt2", "--eps", "1e-6",
                   "--output", str(cert))
    assert code == EXIT_OK
    doc = json.loads(cert.read_text())
    assert doc["achieved_float"] < 1e-6 and doc["steps"][0]["rule"] == "DIFF"
    code, out = _run(capsys, "closure", "verify", str(cert))
    assert code == EXIT_OK and json.loads(out)["verified"] is True

    doc["steps"][1]["output"] = doc["steps"][0]["output"]
    cert.write_text(json.dumps(doc))
    code, out = _run(capsys, "closure", "verify", str(cert))
    assert code == EXIT_REFUTED and json.loads(out)["verified"] is False


def test_derive_strategy_c(capsys):
    code, out = _run(capsys, "closure", "derive", "--seeds", "sqrt2/8", "--conv", "1/4",
                     "--inj", "1/2", "--periodic", "--strategy", "C", "--eps", "1e-2")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["steps"][0]["params"]["n"] == 17


def test_derive_rationality_report_exit(capsys):
    code, out = _run(capsys, "closure", "derive", "--seeds", "2,1", "--eps", "1e-3")
    assert code == EXIT_REFUTED and json.loads(out)["outcome"] == "rationality-report"


def test_derive_budget_exit(capsys):
    code, out = _run(capsys, "closure", "derive", "--seeds", "1,sqrt2", "--eps", "1e-9",
                     "--budget", "2")
    assert code == EXIT_BUDGET and json.loads(out)["outcome"] == "budget-exhausted"


def test_derive_field_mismatch_exit(capsys):
    code, _ = _run(capsys, "closure", "derive", "--seeds", "sqrt2,sqrt3", "--eps", "1e-3")
    assert code == EXIT_PRECONDITION


@pytest.mark.parametrize("example, verdict", [("ex1", "consistent-with-membership"),
                                              ("ex2", "consistent-with-membership"),
                                              ("ex3", "consistent-with-membership")])
def test_counterexample_run(capsys, example, verdict):
    code, out = _run(capsys, "counterexample", "run", "--id", example, "--pairs", "500")
    assert code == EXIT_OK and json.loads(out)["audit"]["verdict"] == verdict


def test_counterexample_refuted_still_exits_zero(capsys):
    code, out = _run(capsys, "counterexample", "run", "--id", "ex1", "--r", "sqrt2",
                     "--pairs", "100", "--report", "text")
    assert code == EXIT_OK and "refuted" in out


def test_counterexample_ex4(capsys):
    code, out = _run(capsys, "counterexample", "run", "--id", "ex4")
    assert code == EXIT_OK and json.loads(out)["all_cells_confirm"] is True


def test_bad_hex_diameter(capsys):
    code, _ = _run(capsys, "counterexample", "run", "--id", "ex3", "--hex-diameter", "0.5")
    assert code == EXIT_PRECONDITION


@pytest.mark.parametrize("argv", [
    [], ["frobnicate"], ["rbar", "--model", "e2"], ["lens-profile", "--model", "e2", "--r", "1",
                                                   "--format", "png"],
])
def test_usage_errors(capsys, argv):
    assert main(argv) == EXIT_USAGE


def test_bad_model_is_precondition(capsys):
    code, _ = _run(capsys, "rbar", "--model", "q7", "--r", "1")
    assert code == EXIT_PRECONDITION


def test_verify_suite(capsys):
    code, out = _run(capsys, "verify-suite", "--model", "t2", "--report", "json")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["passed"] is True
    assert {r["suite"] for r in doc["results"]} >= {"triangle-inequality", "rbar-bracket"}


@pytest.mark.parametrize("model_id", ["e2", "s2", "h2"])
def test_suites_pass(model_id):
    results = run_suite(model_from_id(model_id), seed=1)
    assert all(r.passed for r in results), [r for r in results if not r.passed]


def test_small_distance_criterion_with_wider_factor():
    ok, detail = small_lemma_check(model_from_id("s2"), np.random.default_rng(3), n=300,
                                   factor=Fraction(4, 5))
    assert ok, detail
