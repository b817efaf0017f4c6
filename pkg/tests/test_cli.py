import json
from pathlib import Path

import pytest

from ahc.cli import dumps, fmt, main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path, text, name="c.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


SMALL_H = """
experiment:
  type: sweep-h
  R: 4
  h_list: [1, 2]
  spacing: 0.25
  seeds: [0, 1]
medium:
  kind: random_checkerboard
  lambda: 1.0
  Lambda_cap: 4.0
  values: [1.0, 2.0]
"""


def test_oracle_config_passes(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--config", str(CONFIGS / "oracle-1d.yaml"), "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["passed"] and summary["relative_error"] < 0.01
    assert (out / "samples.csv").read_text().startswith("experiment,d,")
    assert not (out / "timings.csv").exists()
    assert main(["report", "--out", str(out)]) == 0
    assert "PASS oracle-1d" in capsys.readouterr().out


def test_invalid_bounds_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, SMALL_H.replace("lambda: 1.0", "lambda: 5.0"))
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 1
    err = capsys.readouterr().err
    assert "medium.lambda" in err and "medium.Lambda_cap" in err
    assert not (tmp_path / "o" / "summary.json").exists()


def test_missing_config_and_bad_jobs(tmp_path):
    assert main(["run", "--config", str(tmp_path / "none.yaml"), "--out", str(tmp_path)]) == 1
    assert main(["run", "--config", str(CONFIGS / "oracle-1d.yaml"), "--out", str(tmp_path), "--jobs", "0"]) == 1


def test_report_on_empty_dir(tmp_path, capsys):
    assert main(["report", "--out", str(tmp_path)]) == 1
    assert "summary.json" in capsys.readouterr().err


def test_runs_are_byte_identical(tmp_path):
    cfg = write(tmp_path, SMALL_H)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", cfg, "--out", str(a)]) == 0
    assert main(["run", "--config", cfg, "--out", str(b), "--jobs", "2"]) == 0
    for name in ("samples.csv", "summary.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert not list(a.glob(".ahc-stage-*"))


def test_wall_time_opt_in(tmp_path):
    cfg = write(tmp_path, SMALL_H + "output:\n  record_wall_time: true\n")
    out = tmp_path / "o"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    assert (out / "timings.csv").read_text().startswith("seed,R,h,wall_ms")
    rows = (out / "samples.csv").read_text().splitlines()[1:]
    assert all(r.split(",")[-1] != "" for r in rows)


def test_seed_override_env(tmp_path, monkeypatch):
    monkeypatch.setenv("AHC_SEED_OVERRIDE", "5")
    out = tmp_path / "o"
    assert main(["run", "--config", write(tmp_path, SMALL_H), "--out", str(out)]) == 0
    rows = (out / "samples.csv").read_text().splitlines()[1:]
    assert len(rows) == 2 and all(r.split(",")[7] == "5" for r in rows)


def test_report_sweep_lists_checks(tmp_path, capsys):
    out = tmp_path / "o"
    main(["run", "--config", write(tmp_path, SMALL_H), "--out", str(out)])
    capsys.readouterr()
    assert main(["report", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "h_monotonicity" in text and "basic_bound" in text


def test_float_formatting_round_trips():
    x = 0.1 + 0.2
    assert float(fmt(x)) == x
    assert json.loads(dumps({"a": [x, 1, None, True, "s"]})) == {"a": [x, 1, None, True, "s"]}
