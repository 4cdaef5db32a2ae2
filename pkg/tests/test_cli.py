import csv
import io
import json
import os
import subprocess
import sys
from dataclasses import replace

import pytest

from onoffnet import analytics, cli


def run(argv, tmp_path, capsys=None):
    code = cli.main(argv + ["--out", str(tmp_path)])
    return code


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


def test_analytic_worked_example(tmp_path, capsys):
    assert run(["analytic", "--kind", "cap", "--lambda", "10", "--q", "0.1"], tmp_path) == 0
    rows = dict(read_csv(tmp_path / "analytic.csv")[1:])
    assert float(rows["delta"]) == pytest.approx(0.651322, abs=1e-6)
    assert float(rows["drop_prob"]) == pytest.approx(0.348678, abs=1e-6)
    assert "delta" in capsys.readouterr().out
    m = json.loads((tmp_path / "manifest.json").read_text())
    assert m["subcommand"] == "analytic" and m["outputs"] == ["analytic.csv"]
    for key in ("config", "version", "seed", "timestamp", "argv", "replay_argv"):
        assert key in m


def test_missing_lambda_is_usage_error(tmp_path, capsys):
    assert cli.main(["analytic", "--kind", "pap"]) == 2
    assert "--lambda" in capsys.readouterr().err


def test_bad_config_value_exit_2(tmp_path, capsys):
    code = run(["simulate", "--set", "channel.alpha=1.5"], tmp_path)
    assert code == 2
    assert "channel.alpha" in capsys.readouterr().err


def test_unknown_config_key(tmp_path, capsys):
    assert run(["simulate", "--set", "bogus=1"], tmp_path) == 2


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.conf"
    cfg.write_text("n = 4  # links\narrivals.kind = bap\narrivals.lambda = 4\nhorizon = 800\n")
    out = tmp_path / "o"
    assert cli.main(["simulate", "--config", str(cfg), "--set", "n=3", "--out", str(out)]) == 0
    rows = read_csv(out / "stats.csv")
    assert rows[0] == cli.STATS_COLUMNS
    assert [r[0] for r in rows[1:]] == ["0", "1", "2", "network"]


def test_simulate_is_byte_deterministic(tmp_path):
    argv = ["simulate", "--set", "n=5", "--set", "horizon=1500", "--seed", "9"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(argv + ["--out", str(a)]) == 0
    assert cli.main(argv + ["--out", str(b)]) == 0
    for name in ("stats.csv", "summary.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_simulate_replications_and_svg(tmp_path):
    argv = ["simulate", "--set", "n=4", "--set", "horizon=1000", "--replications", "2",
            "--svg"]
    assert run(argv, tmp_path) == 0
    assert (tmp_path / "stats_stderr.csv").exists()
    assert (tmp_path / "stats.svg").read_text().startswith("<svg")


def test_sweep_columns_and_skipped_points(tmp_path):
    argv = ["sweep", "--axis", "lambda", "--kind", "pap", "--epsilon", "0.05", "--n", "500",
            "--grid", "5,100,1000"]
    assert run(argv, tmp_path) == 0
    rows = read_csv(tmp_path / "sweep.csv")
    assert rows[0] == cli.SWEEP_COLUMNS
    teff = [r for r in rows[1:] if r[3] == "t_eff"]
    assert teff[0][-1] == "domain" and teff[0][4] == ""
    assert float(teff[1][4]) == pytest.approx(4.796, abs=5e-4)
    assert teff[1][-1] == ""


def test_sweep_all_skipped_exit_2(tmp_path):
    argv = ["sweep", "--axis", "lambda", "--kind", "pap", "--epsilon", "0.05", "--grid", "2,5"]
    assert run(argv, tmp_path) == 2


def test_sweep_epsilon_ordering(tmp_path):
    argv = ["sweep", "--axis", "epsilon", "--kinds", "pap,cap", "--grid", "0.05,0.01", "--svg"]
    assert run(argv, tmp_path) == 0
    rows = read_csv(tmp_path / "sweep.csv")
    deg = {(r[2], float(r[1])): float(r[4]) for r in rows[1:] if r[3] == "degradation"}
    for eps in (0.05, 0.01):
        assert deg[("cap", eps)] < deg[("pap", eps)]
    assert any(p.endswith(".svg") for p in os.listdir(tmp_path))


def test_bad_grid(tmp_path):
    assert run(["sweep", "--axis", "q", "--grid", "log:1:x:3"], tmp_path) == 2


def test_validate_pass_and_fail(tmp_path, monkeypatch):
    argv = ["validate", "--set", "n=10", "--set", "horizon=20000", "--set", "policy.q=0.3",
            "--set", "arrivals.kind=cap", "--set", "arrivals.lambda=5", "--z", "5"]
    assert run(argv, tmp_path) == 0
    rows = read_csv(tmp_path / "validation.csv")
    assert rows[0] == cli.VALIDATION_COLUMNS
    assert all(r[-1] == "true" for r in rows[1:])
    real = analytics.report
    monkeypatch.setattr(analytics, "report", lambda cfg: replace(real(cfg), delta=0.01))
    assert run(argv, tmp_path) == 1
    assert read_csv(tmp_path / "validation.csv")[1][-1] == "false"


def test_optimize(tmp_path, capsys):
    argv = ["optimize", "--kind", "cap", "--lambda", "2000", "--n", "500", "--alpha-hat", "0.2"]
    assert run(argv, tmp_path) == 0
    out = capsys.readouterr().out
    assert "numeric" in out and "asymptotic" in out
    rows = read_csv(tmp_path / "optimize.csv")
    assert rows[0] == cli.OPTIMIZE_COLUMNS
    asym = [r for r in rows[1:] if r[0] == "asymptotic"][0]
    assert asym[8] == "case3"
    assert float(asym[5]) == pytest.approx(0.003526, abs=5e-6)


def test_optimize_pap_equals_bap(tmp_path):
    q = {}
    for kind in ("pap", "bap"):
        d = tmp_path / kind
        assert cli.main(["optimize", "--kind", kind, "--lambda", "10", "--n", "500",
                         "--alpha-hat", "0.2", "--out", str(d)]) == 0
        q[kind] = [r for r in read_csv(d / "optimize.csv") if r[0] == "asymptotic"][0][5]
    assert q["pap"] == q["bap"]


def test_replay_reproduces_csv(tmp_path):
    a = tmp_path / "a"
    assert cli.main(["simulate", "--set", "n=4", "--set", "horizon=1200", "--seed", "3",
                     "--out", str(a)]) == 0
    b = tmp_path / "b"
    assert cli.main(["replay", str(a / "manifest.json"), "--out", str(b)]) == 0
    assert (a / "stats.csv").read_bytes() == (b / "stats.csv").read_bytes()


def test_replay_missing_manifest(tmp_path):
    assert cli.main(["replay", str(tmp_path / "nope.json")]) == 2


def test_invariant_violation_exit_3(tmp_path, monkeypatch):
    from onoffnet import sim

    def boom(*a, **k):
        raise sim.SimulationInvariantError("link 0: arrivals not conserved")

    monkeypatch.setattr(sim, "run", boom)
    assert run(["simulate", "--set", "n=2"], tmp_path) == 3


def test_config_round_trip():
    cfg = cli.build_config({"n": "7", "arrivals.kind": "cap", "arrivals.lambda": "3",
                            "policy.q": "0.25", "horizon": "600"})
    again = cli.build_config(cli.parse_config_text(cli.config_text(cfg)))
    assert again == cfg
    assert cfg.policy.activation_prob() == pytest.approx(0.25)


def test_fmt():
    assert cli.fmt(0.1) == "0.1"
    assert cli.fmt(True) == "true"
    assert cli.fmt(None) == ""
    assert cli.fmt(3) == "3"


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "onoffnet", "analytic", "--kind", "bap",
                        "--lambda", "10", "--q", "0.1", "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0
    rows = dict(csv.reader(io.StringIO(r.stdout)))
    assert float(rows["delta"]) == pytest.approx(0.526316, abs=1e-6)
