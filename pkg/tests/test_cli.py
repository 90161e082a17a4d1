from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np
import pytest

from multistop.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, EXIT_VALIDATION, fmt, main
from multistop.config import ConfigError, parse_config

ROOT = Path(__file__).resolve().parents[1]
REFERENCE = ROOT / "configs" / "reference.ini"

SMALL = """
[model]
drift = 0.36
sigma = 0.2
down_jump_rate = 1
down_mix = 1:1

[contract]
strike = 50
alpha = {alpha}
n_exercises = 3

[refraction]
mean = 1.0

[mc]
seed = 7
n_paths = 2000

[output]
grid_points = 41
sweep_means = 0.5 1 2
"""


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_reference_config_parses():
    from multistop.config import load_config
    cfg = load_config(REFERENCE)
    assert cfg.model.drift == 0.36 and cfg.contract.n_exercises == 5
    assert cfg.refraction.rate == 1.0 and len(cfg.output.sweep_means) == 20


def test_unknown_key_reports_line():
    text = SMALL.format(alpha=-0.02).replace("sigma = 0.2", "sigma = 0.2\nsigmaa = 1")
    with pytest.raises(ConfigError, match=r"cfg:\d+: \[model\] sigmaa: unknown key"):
        parse_config(text, "cfg")
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(text.replace("[mc]", "[montecarlo]").replace("sigmaa = 1\n", ""), "cfg")


def test_bad_values_rejected():
    base = SMALL.format(alpha=-0.02)
    with pytest.raises(ConfigError, match="down_mix"):
        parse_config(base.replace("down_mix = 1:1", "down_mix = 1-1"), "cfg")
    with pytest.raises(ConfigError, match="n_exercises"):
        parse_config(base.replace("n_exercises = 3", "n_exercises = 2.5"), "cfg")
    with pytest.raises(ConfigError, match="either rate or mean"):
        parse_config(base.replace("mean = 1.0", "mean = 1.0\nrate = 1.0"), "cfg")
    with pytest.raises(ConfigError, match="required"):
        parse_config(base.replace("strike = 50\n", ""), "cfg")


def test_exit_codes(tmp_path, capsys):
    good = write(tmp_path, SMALL.format(alpha=-0.02))
    assert main(["validate", "--config", good]) == EXIT_OK
    bad = write(tmp_path, SMALL.format(alpha=-0.5), "bad.ini")
    assert main(["validate", "--config", bad]) == EXIT_VALIDATION
    assert main(["solve", "--config", bad, "--out", str(tmp_path)]) == EXIT_VALIDATION
    broken = write(tmp_path, "[model\ndrift=1", "broken.ini")
    assert main(["solve", "--config", broken]) == EXIT_CONFIG
    assert main(["solve", "--config", str(tmp_path / "missing.ini")]) == EXIT_CONFIG
    # a mean refraction of 60 gives rate 1/60 < -alpha: that cell is rejected, the rest solve
    rc = main(["sweep", "--config", good, "--out", str(tmp_path), "--means", "1", "60"])
    assert rc == EXIT_NUMERIC
    rows = read_csv(tmp_path / "sweep.csv")
    assert [r[2] for r in rows[1:] if r[0] == "60"] == ["nan"] * 3
    err = capsys.readouterr().err
    assert "error: code=4" in err and "delta_bar=60 failed" in err and "refraction_rate" in err


def test_solve_outputs(tmp_path):
    cfgp = write(tmp_path, SMALL.format(alpha=-0.02))
    assert main(["solve", "--config", cfgp, "--out", str(tmp_path)]) == EXIT_OK
    th = read_csv(tmp_path / "thresholds.csv")
    assert th[0] == ["k", "x_star_log", "s_star_price"] and len(th) == 4
    xs = [float(r[1]) for r in th[1:]]
    assert all(a > b for a, b in zip(xs, xs[1:]))
    assert float(th[1][2]) == pytest.approx(math.exp(xs[0]), rel=1e-15)
    vals = read_csv(tmp_path / "values.csv")
    assert vals[0] == ["x", "v1", "v2", "v3", "payoff"] and len(vals) == 42
    V = np.array(vals[1:], dtype=float)
    assert np.all(np.diff(V[:, 1:4], axis=1) > 0)
    assert np.all(V[:, 1] >= V[:, 4] * (1 - 1e-13))
    # 17 significant digits round-trip exactly
    assert all(fmt(float(s)) == s for s in vals[5])


def test_sweep_outputs(tmp_path):
    cfgp = write(tmp_path, SMALL.format(alpha=-0.02))
    assert main(["sweep", "--config", cfgp, "--out", str(tmp_path)]) == EXIT_OK
    rows = read_csv(tmp_path / "sweep.csv")
    assert rows[0] == ["delta_bar", "k", "x_star"] and len(rows) == 1 + 3 * 3
    x1 = {r[2] for r in rows[1:] if r[1] == "1"}
    assert len(x1) == 1


def test_sweep_parallel_matches_serial(tmp_path):
    cfgp = write(tmp_path, SMALL.format(alpha=-0.02))
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    assert main(["sweep", "--config", cfgp, "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(["sweep", "--config", cfgp, "--out", str(tmp_path / "b"), "--workers", "2"]) == EXIT_OK
    assert (tmp_path / "a" / "sweep.csv").read_bytes() == (tmp_path / "b" / "sweep.csv").read_bytes()


def test_check_and_bit_identical_reruns(tmp_path):
    cfgp = write(tmp_path, SMALL.format(alpha=-0.02))
    outs = []
    for run in ("r1", "r2"):
        d = tmp_path / run
        assert main(["solve", "--config", cfgp, "--out", str(d)]) == EXIT_OK
        assert main(["check", "--config", cfgp, "--out", str(d), "--paths", "3000"]) == EXIT_OK
        outs.append({f: (d / f).read_bytes() for f in ("thresholds.csv", "values.csv", "check_report.txt")})
    assert outs[0] == outs[1]
    report = outs[0]["check_report.txt"].decode()
    assert "FAIL" not in report and "SUMMARY" in report and "paths=3000" in report


def test_check_without_mc(tmp_path):
    cfgp = write(tmp_path, SMALL.format(alpha=-0.02))
    assert main(["check", "--config", cfgp, "--out", str(tmp_path), "--no-mc"]) == EXIT_OK
    assert "mc_" not in (tmp_path / "check_report.txt").read_text()
