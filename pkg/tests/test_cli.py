import csv
import json
import shutil

import pytest

from holoscale.cli import diff_reports, main, verify_corpus

from .conftest import CORPUS

FAST = ("identity", "quartic")


@pytest.fixture(scope="module")
def small_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    (root / "golden").mkdir()
    for name in FAST:
        shutil.copy(CORPUS / f"{name}.cdl", root)
        shutil.copy(CORPUS / "golden" / f"{name}.json", root / "golden")
    return root


@pytest.fixture(scope="module")
def quartic_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    code = main(["run", str(CORPUS / "quartic.cdl"), "--out", str(out), "--quiet"])
    return code, out


def test_run_writes_report_and_series(quartic_run):
    code, out = quartic_run
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    v = report["verdicts"]
    assert (v["case"], v["normality"], v["limit"]) == ("AccumulationPoint", "Bounded", "Cauchy")
    assert v["type"]["kind"] == "Finite" and v["type"]["t_estimate"] == 4
    assert v["limit_fit"]["residual"] < 1e-9
    assert [r["j"] for r in report["per_j"]] == list(range(1, 13))
    assert report["tool"]["name"] == "holoscale" and report["seed"] == 7
    timings = json.loads((out / "timings.json").read_text())
    assert "dangelo_type" in timings
    rows = list(csv.reader(open(out / "series" / "per_j.csv")))
    assert rows[0][0] == "j" and len(rows) == 13
    assert (out / "series" / "cloud_j12.txt").exists()


def test_run_is_reproducible(quartic_run, tmp_path):
    _, out = quartic_run
    assert main(["run", str(CORPUS / "quartic.cdl"), "--out", str(tmp_path), "--quiet"]) == 0
    assert (tmp_path / "report.json").read_bytes() == (out / "report.json").read_bytes()


def test_run_flags(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("HOLOSCALE_OUT", str(tmp_path))
    assert main(["run", str(CORPUS / "identity.cdl"), "--jmax", "8", "--mode", "variety"]) == 3
    printed = capsys.readouterr().out
    assert "DegenerateEigenvectors" in printed
    report = json.loads((tmp_path / "identity" / "report.json").read_text())
    assert report["config"]["jmax"] == 8 and len(report["per_j"]) == 8
    assert report["verdicts"]["mode"] == "VarietyEigen"
    assert any(e["op"] == "variety_scale" for e in report["errors"])


def test_missing_config_exits_2(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.cdl")]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_syntax_error_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.cdl"
    bad.write_text("domain { r = abs(z^2 - 1; }\n")
    assert main(["run", str(bad)]) == 2
    assert "1:" in capsys.readouterr().err


def test_numerical_failure_exits_3(tmp_path):
    cfg = tmp_path / "flat.cdl"
    cfg.write_text("domain { r = abs(z)^2 - 1; r = abs(w)^2 - 1; }\n"
                   "family { f = z; g = a*w^2; alpha(j) = 1 - 2^(-j); }\n"
                   "experiment { jmax = 8; n = 200; nb = 50; }\n")
    assert main(["run", str(cfg), "--out", str(tmp_path / "o"), "--quiet"]) == 3
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert {e["type"] for e in report["errors"]} >= {"DegenerateJacobian"}


def test_verify_pristine(small_corpus, tmp_path):
    assert main(["verify", str(small_corpus), "--out", str(tmp_path), "--quiet"]) == 0


def test_verify_detects_perturbed_golden(small_corpus, tmp_path, capsys):
    bad = tmp_path / "corpus"
    shutil.copytree(small_corpus, bad)
    g = bad / "golden" / "quartic.json"
    report = json.loads(g.read_text())
    report["per_j"][3]["lambda2"][0] *= 1.1
    g.write_text(json.dumps(report))
    assert main(["verify", str(bad), "--out", str(tmp_path / "o")]) == 1
    out = capsys.readouterr().out
    assert "FAIL quartic" in out and "per_j[3].lambda2[0]" in out
    assert "PASS identity" in out


def test_verify_other_seed_keeps_verdicts(small_corpus, tmp_path):
    passed, failed = verify_corpus(small_corpus, tmp_path, seed=99)
    assert not failed and len(passed) == len(FAST)


def test_verify_missing_corpus(tmp_path):
    assert main(["verify", str(tmp_path / "nope")]) == 2
    (tmp_path / "empty").mkdir()
    assert main(["verify", str(tmp_path / "empty")]) == 2


def test_diff_reports_tolerances():
    want = {"a": 1.0, "b": [1, 2], "per_j": [{"hausdorff_step": 0.1}], "tool": {"version": "x"}}
    got = {"a": 1.0 + 1e-12, "b": [1, 2], "per_j": [{"hausdorff_step": 0.1 * (1 + 1e-7)}], "tool": {"version": "y"}}
    assert diff_reports(got, want) == []
    got["a"] = 1.01
    assert diff_reports(got, want) == ["a: got 1.01, expected 1.0"]
    assert diff_reports({"a": 1.0, "b": [1]}, {"a": 1.0, "b": [1, 2]}) == ["b: length differs"]
