import csv
import json

import pytest

from qplab.cli import build_parser, run


def _report(capsys):
    return json.loads(capsys.readouterr().out)


def test_gen_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["gen", "cooklevin", "--accepting", "--m", "2", "--seed", "3", "--out", str(a)]) == 0
    rep = _report(capsys)["result"]
    assert rep["gap"] > 2 / rep["p"]
    assert run(["gen", "cooklevin", "--accepting", "--m", "2", "--seed", "3", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_gen_prs_key_count(tmp_path, capsys):
    f = tmp_path / "prs.json"
    assert run(["gen", "prs", "--key-bits", "4", "--seed", "1", "--out", str(f)]) == 0
    assert _report(capsys)["result"]["keys"] == 16


def test_qor_exact_report(tmp_path, capsys):
    f = tmp_path / "q.json"
    run(["gen", "qor", "--case", "yes", "--seed", "2", "--out", str(f)])
    capsys.readouterr()
    assert run(["qor", "--instance", str(f), "--mode", "exact"]) == 0
    rep = _report(capsys)
    assert rep["result"]["report"]["p_exact"] >= (2 / 3) ** 2 / 7
    assert rep["config"]["instance"] == str(f)


def test_lhwp_round_trip_rebuilds_instance(tmp_path, capsys):
    f = tmp_path / "y.json"
    run(["gen", "cooklevin", "--accepting", "--m", "1", "--seed", "4", "--out", str(f)])
    capsys.readouterr()
    assert run(["lhwp", "--instance", str(f)]) == 0
    assert _report(capsys)["result"]["report"]["verdict"] == "accept"


def test_protocol_mixedness_no_case(capsys):
    assert run(["protocol", "mixedness", "--no-case", "--t", "16", "--mode", "exact"]) == 0
    assert _report(capsys)["result"]["transcript"]["p_exact"] == pytest.approx(0.227249145508)


def test_invalid_json_reports_position(tmp_path, capsys):
    f = tmp_path / "bad.json"
    f.write_text('{"version": "qplab-1",\n  "n": }\n')
    assert run(["qor", "--instance", str(f)]) == 1
    assert f"{f}:2:" in capsys.readouterr().err


def test_schema_mismatch_and_missing_seed(tmp_path, capsys, monkeypatch):
    f = tmp_path / "old.json"
    f.write_text('{"version": "qplab-0"}')
    assert run(["qor", "--instance", str(f)]) == 1
    monkeypatch.delenv("QPLAB_SEED", raising=False)
    assert run(["stod", "--trials", "2"]) == 1
    monkeypatch.setenv("QPLAB_SEED", "11")
    assert run(["stod", "--trials", "2"]) == 0
    assert _report(capsys)["config"]["seed"] == 11


def test_unknown_subcommand_exits_one():
    with pytest.raises(SystemExit) as e:
        build_parser().parse_args(["bogus"])
    assert e.value.code == 1


def test_promise_violation_exit_code(tmp_path, capsys):
    f = tmp_path / "n.json"
    # one input qubit with three gates leaves no gap between a and b
    assert run(["gen", "cooklevin", "--m", "3", "--n-input", "1", "--seed", "0", "--out", str(f)]) == 2


def test_crypto_csv_and_jobs_determinism(tmp_path, capsys):
    c1, c2 = tmp_path / "1.csv", tmp_path / "2.csv"
    assert run(["crypto", "owsg", "--key-bits", "4", "--trials", "6", "--seed", "3", "--csv", str(c1)]) == 0
    assert run(["crypto", "owsg", "--key-bits", "4", "--trials", "6", "--seed", "3", "--csv", str(c2), "--jobs", "2"]) == 0
    assert c1.read_text() == c2.read_text()
    rows = list(csv.reader(c1.open()))
    assert rows[0] == ["seed", "case", "oracle_verdict", "advantage"]
    assert len(rows) == 7
    capsys.readouterr()
    assert run(["crypto", "prs", "--trials", "50", "--seed", "1"]) == 0
    assert _report(capsys)["result"]["advantage"] >= 0.5


def test_commit_and_metrics(capsys):
    assert run(["crypto", "commit", "--lam", "2", "--k", "1", "--seed", "2"]) == 0
    res = _report(capsys)["result"]
    assert res["hiding_trace_distance"] < 1e-10
    assert res["half_r_only_fidelity_sq"] <= 0.75
    assert run(["metrics", "--trials", "20", "--seed", "1"]) == 0
    assert all(c["passed"] for c in _report(capsys)["result"]["checks"])


def test_float_formatting(capsys):
    run(["amplify", "--a", "3/4", "--p", "4", "--s", "32", "--q", "3/4"])
    text = capsys.readouterr().out
    rep = json.loads(text)["result"]
    assert len(repr(rep["p_exact"]).replace("0.", "").lstrip("0")) <= 13
