from __future__ import annotations

import csv
import io
import json
import math

import pytest

from wigprod.cli import COMPARE_COLUMNS, main
from wigprod.envelope import SCHEMA_VERSION, ExperimentConfig, ResultEnvelope, csv_text, jsonable


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def _json(capsys, *argv):
    code, out = _run(capsys, *argv)
    return code, json.loads(out)


def test_verify_pass_exit_zero(capsys):
    code, env = _json(capsys, "verify", "--identity", "thm1-hermitised", "--n", "2", "--m", "1",
                      "--dist", "gaussian-c:1", "--samples", "20000", "--seed", "1")
    assert code == 0
    assert env["payload"]["verdict"] == "pass"
    for key in ("schema_version", "tool", "version", "config", "wall_time", "payload_type", "payload"):
        assert key in env
    assert env["schema_version"] == SCHEMA_VERSION and env["payload_type"] == "VerificationReport"


def test_verify_fail_exit_one(capsys):
    code, _ = _run(capsys, "verify", "--identity", "thm1-hermitised", "--n", "2", "--dist", "const:2",
                   "--samples", "2000")
    assert code == 1


def test_verify_inconclusive_exit_two(capsys):
    code, _ = _run(capsys, "verify", "--identity", "thm1-hermitised", "--n", "1",
                   "--dist", "two-point:1:999:-1:0.001", "--samples", "1000")
    assert code == 2


@pytest.mark.parametrize("argv", [
    ["verify", "--identity", "thm1-hermitised", "--n", "2"],
    ["verify", "--identity", "thm1-hermitised", "--n", "2", "--dist", "no-such-law"],
    ["verify", "--identity", "bogus", "--n", "2", "--dist", "rademacher"],
    ["verify", "--identity", "lemma1-part1", "--n", "2", "--dist", "rademacher", "--samples", "2000"],
    ["lyapunov", "--n", "2", "--m", "10"],
    ["zeros", "--n", "2"],
])
def test_usage_errors_exit_three(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        code = main(argv)
        raise SystemExit(code)
    assert exc.value.code == 3
    capsys.readouterr()


def test_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("WIGPROD_SEED", "17")
    _, env = _json(capsys, "verify", "--identity", "eq6-trivial", "--n", "2", "--dist", "rademacher",
                   "--samples", "2000")
    assert env["config"]["seed"] == 17
    _, env = _json(capsys, "verify", "--identity", "eq6-trivial", "--n", "2", "--dist", "rademacher",
                   "--samples", "2000", "--seed", "3")
    assert env["config"]["seed"] == 3
    monkeypatch.delenv("WIGPROD_SEED")
    _, env = _json(capsys, "verify", "--identity", "eq6-trivial", "--n", "2", "--dist", "rademacher",
                   "--samples", "2000")
    assert env["config"]["seed"] == 0


def test_config_round_trip():
    cfg = ExperimentConfig(command="verify", n=3, m=2, dist="rademacher,gaussian-c:1", identity="thm1-mixed",
                           samples=5000, seed=9, r=None, workers=4)
    assert ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({**cfg.to_dict(), "extra": 1})


def test_envelope_round_trip(tmp_path):
    env = ResultEnvelope(ExperimentConfig(command="zeros", n=2, m=3), "ZeroSet", {"a": [1.0, math.nan, math.inf]})
    p = tmp_path / "e.json"
    env.save(p)
    back = ResultEnvelope.load(p)
    assert back.config == env.config
    assert back.payload == {"a": [1.0, None, "inf"]}
    bad = env.to_dict()
    bad["schema_version"] = 99
    with pytest.raises(ValueError):
        ResultEnvelope.from_dict(bad)


def test_jsonable_and_csv():
    assert jsonable({"x": -math.inf, "c": 1 + 2j}) == {"x": "-inf", "c": {"re": 1.0, "im": 2.0}}
    text = csv_text([{"a": 0.1, "b": None}, {"a": 1}], ["a", "b"])
    assert list(csv.reader(io.StringIO(text))) == [["a", "b"], ["0.1", ""], ["1", ""]]


def test_rerun_identical_across_workers(tmp_path, capsys):
    out = tmp_path / "env.json"
    code, _ = _run(capsys, "verify", "--identity", "thm2-kernel", "--n", "2", "--m", "2", "--dist", "gaussian-c:1",
                   "--samples", "6000", "--seed", "5", "--out", str(out))
    assert code == 0 and out.exists()
    for w in ("1", "2", "8"):
        code, text = _run(capsys, "rerun", str(out), "--workers", w)
        assert code == 0 and text.strip() == "identical"


def test_rerun_reports_mismatch(tmp_path, capsys):
    out = tmp_path / "env.json"
    _run(capsys, "zeros", "--n", "3", "--m", "4", "--out", str(out))
    d = json.loads(out.read_text())
    d["payload"]["zeros"]["rescaled"][0] += 1.0
    out.write_text(json.dumps(d))
    code, text = _run(capsys, "rerun", str(out))
    assert code == 1 and text.startswith("MISMATCH")


def test_zeros_n1(capsys):
    code, env = _json(capsys, "zeros", "--n", "1", "--m", "7")
    assert code == 0
    z = env["payload"]["zeros"]
    assert z["log_zeros"][0] == pytest.approx(0.0, abs=1e-12)
    assert z["rescaled"][0] == pytest.approx(0.0, abs=1e-12)


def test_zeros_csv_format(capsys):
    code, text = _run(capsys, "zeros", "--n", "3", "--m", "5", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert code == 0 and len(rows) == 3
    assert [int(r["j"]) for r in rows] == [1, 2, 3]
    assert float(rows[0]["rescaled"]) < float(rows[1]["rescaled"]) < float(rows[2]["rescaled"])


def test_zeros_checks(capsys):
    code, env = _json(capsys, "zeros", "--n", "5", "--m", "100", "--check", "refined")
    assert code == 0 and all(abs(r["residual"]) < 5e-3 for r in env["payload"]["refined"])
    code, env = _json(capsys, "zeros", "--n", "4", "--m", "20", "--check", "prop1")
    assert env["payload"]["prop1"]["max_dev"] > 0
    code, env = _json(capsys, "zeros", "--n", "3", "--m", "50", "--check", "prop2")
    assert env["payload"]["prop2"]["grid_points"] == 121


def test_emit_complex_zeros(tmp_path, capsys):
    path = tmp_path / "z.csv"
    code, env = _json(capsys, "zeros", "--n", "5", "--m", "50", "--emit-complex-zeros", str(path))
    assert code == 0
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["re", "im"] and len(rows) == 501
    assert env["payload"]["complex_zeros"]["ring_counts"] == [100] * 5


def test_lyapunov_const_hook(capsys):
    code, env = _json(capsys, "lyapunov", "--n", "1", "--m", "10", "--dist", "const:2", "--reps", "3")
    assert code == 0
    assert env["payload"]["run"]["mean"][0] == pytest.approx(math.log(2), abs=1e-15)


def test_lyapunov_closed_form(capsys):
    code, env = _json(capsys, "lyapunov", "--n", "2", "--m", "2000", "--dist", "gaussian-c:1", "--reps", "16",
                      "--compare-closed-form", "--seed", "2")
    cf = env["payload"]["closed_form"]
    assert cf["beta"] == 2 and len(cf["z"]) == 2
    assert code == (0 if cf["verdict"] == "pass" else 1)


def test_compare_zeros_csv(capsys):
    code, text = _run(capsys, "lyapunov", "--n", "4", "--m", "50", "--beta", "2", "--compare-zeros",
                      "--format", "csv")
    rows = list(csv.reader(io.StringIO(text)))
    assert code == 0 and rows[0] == COMPARE_COLUMNS and len(rows) == 5
