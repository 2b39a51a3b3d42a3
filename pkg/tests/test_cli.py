"""End-to-end tests for the command-line runner.

Everything goes through ``cli.main`` in-process so exit codes, stderr text
and written files can be checked exactly; one test exercises the installed
``python -m pensionsim`` entry point.
"""

import os
import subprocess
import sys

import pytest

from pensionsim import cli
from pensionsim.errors import ConfigError

# small, fast setup shared by most runs: 10-year horizon, few paths
SMALL = """
n_paths = 120
horizon = 10
annuity.T = 10
seed = 11
"""


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


# ---------------------------------------------------------------------------
# configuration parsing


def test_print_defaults_round_trips(tmp_path, capsys):
    assert cli.main(["simulate", "--print-defaults"]) == 0
    text = capsys.readouterr().out
    cfg = cli.parse_config(write_config(tmp_path, text))
    assert cfg.values == cli.default_config().values
    # every known key appears exactly once
    keys = [line.split("=")[0].strip() for line in text.strip().splitlines()]
    assert keys == list(cli.DEFAULTS)


def test_defaults_without_config_file():
    cfg = cli.parse_config(None)
    assert cfg.source == "<defaults>"
    assert cfg["n_paths"] == 2000
    assert cfg["horizon"] == 41
    assert cfg["annuity.T"] == 41
    assert cfg["annuity.N"] == 20
    assert cfg["strategy.target_rr"] == 0.70
    assert cfg["dp.grid"] == "0.0,0.2,0.4,0.6,0.8,1.0"
    assert not cfg.is_set("n_paths")


def test_explicit_keys_tracked_and_comments_ignored(tmp_path):
    cfg = cli.parse_config(
        write_config(tmp_path, "# comment\nn_paths = 50  # trailing\n\nseed=9\n")
    )
    assert cfg["n_paths"] == 50
    assert cfg["seed"] == 9
    assert cfg.is_set("n_paths") and cfg.is_set("seed")
    assert not cfg.is_set("horizon")


def test_unknown_key_reports_file_and_line(tmp_path):
    path = write_config(tmp_path, "seed = 1\nbogus = 2\n")
    with pytest.raises(ConfigError, match=r"run\.cfg:2.*unknown key 'bogus'"):
        cli.parse_config(path)


def test_type_mismatch_reports_expectation(tmp_path):
    path = write_config(tmp_path, "n_paths = abc\n")
    with pytest.raises(ConfigError, match=r"n_paths expects integer, got 'abc'"):
        cli.parse_config(path)
    path = write_config(tmp_path, "model.mean_x = wide\n")
    with pytest.raises(ConfigError, match=r"expects number, got 'wide'"):
        cli.parse_config(path)


def test_malformed_line_rejected(tmp_path):
    path = write_config(tmp_path, "just some words\n")
    with pytest.raises(ConfigError, match=r"expected key = value"):
        cli.parse_config(path)


def test_range_validation(tmp_path):
    with pytest.raises(ConfigError, match="n_paths must be >= 2, got -1"):
        cli.parse_config(write_config(tmp_path, "n_paths = -1\n"))
    with pytest.raises(ConfigError, match="horizon must be >= 2"):
        cli.parse_config(write_config(tmp_path, "horizon = 1\n"))
    with pytest.raises(ConfigError, match="seed must be a non-negative"):
        cli.parse_config(write_config(tmp_path, "seed = -4\n"))
    with pytest.raises(ConfigError, match="strategy.kind must be one of"):
        cli.parse_config(write_config(tmp_path, "strategy.kind = martingale\n"))
    with pytest.raises(ConfigError, match="dp.mode must be"):
        cli.parse_config(write_config(tmp_path, "dp.mode = global\n"))


def test_missing_config_file_reports_path(tmp_path):
    missing = str(tmp_path / "nope.cfg")
    with pytest.raises(ConfigError, match="cannot read config"):
        cli.parse_config(missing)


def test_scenario_file_excludes_generation_keys(tmp_path):
    data = tmp_path / "scen.csv"
    data.write_text("x\n")  # existence is all that is checked here
    path = write_config(tmp_path, f"scenario.file = {data}\nn_paths = 50\n")
    with pytest.raises(ConfigError, match="exactly one scenario source"):
        cli.parse_config(path)
    path = write_config(tmp_path, f"scenario.file = {data}\nmodel.mean_x = 0.05\n")
    with pytest.raises(ConfigError, match="exactly one scenario source"):
        cli.parse_config(path)


def test_scenario_file_must_exist(tmp_path):
    path = write_config(tmp_path, f"scenario.file = {tmp_path}/missing.csv\n")
    with pytest.raises(ConfigError, match="scenario.file not found"):
        cli.parse_config(path)


def test_invalid_model_params_rejected_at_parse_time(tmp_path):
    # nested dataclass validation surfaces as a config error
    with pytest.raises(ConfigError, match="volatilities"):
        cli.parse_config(write_config(tmp_path, "model.std_x = -0.2\n"))
    with pytest.raises(ConfigError, match="grid"):
        cli.parse_config(write_config(tmp_path, "dp.grid = 0.0,1.5\n"))
    with pytest.raises(ConfigError, match="comma-separated"):
        cli.parse_config(write_config(tmp_path, "dp.grid = a,b\n"))


# ---------------------------------------------------------------------------
# subcommand plumbing


def test_missing_subcommand_exits_1(capsys):
    assert cli.main([]) == 1
    assert "missing subcommand" in capsys.readouterr().err


def test_unknown_subcommand_exits_1(capsys):
    assert cli.main(["transmogrify"]) == 1


def test_config_error_exits_1(tmp_path, capsys):
    path = write_config(tmp_path, "bogus = 2\n")
    assert cli.main(["simulate", "--config", path]) == 1
    assert "unknown key" in capsys.readouterr().err


def test_run_rejects_unknown_subcommand():
    with pytest.raises(ConfigError, match="unknown subcommand"):
        cli.run(cli.default_config(), "transmogrify")


# ---------------------------------------------------------------------------
# simulate


def test_simulate_writes_scenarios_and_moments(tmp_path, capsys):
    cfg = write_config(tmp_path, SMALL)
    out = str(tmp_path / "out")
    assert cli.main(["simulate", "--config", cfg, "--out", out]) == 0
    assert sorted(os.listdir(out)) == ["moments.csv", "scenarios.csv"]
    stdout = capsys.readouterr().out
    assert "wrote" in stdout and "scenarios.csv" in stdout
    header = read_bytes(os.path.join(out, "scenarios.csv")).split(b"\n", 1)[0]
    assert header.startswith(b"path,t,x,pi,w,r1")
    moments = read_bytes(os.path.join(out, "moments.csv")).decode()
    assert moments.splitlines()[0] == "stat,a,b,value"


def test_simulate_deterministic_and_threads_independent(tmp_path):
    cfg = write_config(tmp_path, SMALL)
    outs = [str(tmp_path / f"o{i}") for i in range(3)]
    assert cli.main(["simulate", "--config", cfg, "--out", outs[0], "--threads", "1"]) == 0
    assert cli.main(["simulate", "--config", cfg, "--out", outs[1], "--threads", "1"]) == 0
    assert cli.main(["simulate", "--config", cfg, "--out", outs[2], "--threads", "4"]) == 0
    for name in ("scenarios.csv", "moments.csv"):
        base = read_bytes(os.path.join(outs[0], name))
        assert read_bytes(os.path.join(outs[1], name)) == base
        assert read_bytes(os.path.join(outs[2], name)) == base


def test_seed_override_changes_scenarios(tmp_path):
    cfg = write_config(tmp_path, SMALL)
    out1, out2 = str(tmp_path / "s1"), str(tmp_path / "s2")
    assert cli.main(["simulate", "--config", cfg, "--out", out1, "--seed", "1"]) == 0
    assert cli.main(["simulate", "--config", cfg, "--out", out2, "--seed", "2"]) == 0
    a = read_bytes(os.path.join(out1, "scenarios.csv"))
    b = read_bytes(os.path.join(out2, "scenarios.csv"))
    assert a != b


# ---------------------------------------------------------------------------
# evaluate and the ingestion pipeline


def test_evaluate_writes_single_row_report(tmp_path):
    cfg = write_config(tmp_path, SMALL + "strategy.kind = static\nstrategy.mix = 0.5\n")
    out = str(tmp_path / "ev")
    assert cli.main(["evaluate", "--config", cfg, "--out", out]) == 0
    lines = read_bytes(os.path.join(out, "report.csv")).decode().splitlines()
    assert len(lines) == 2
    assert lines[0].split(",")[0] == "strategy"
    assert lines[1].startswith("static,")


def test_ingested_scenarios_reproduce_generated_report(tmp_path):
    """simulate -> evaluate-from-file matches the single-pass evaluate run."""
    gen_cfg = write_config(tmp_path, SMALL, name="gen.cfg")
    sim_out = str(tmp_path / "sim")
    assert cli.main(["simulate", "--config", gen_cfg, "--out", sim_out]) == 0

    strategy = "strategy.kind = cumulative\nstrategy.r = 0.02\n"
    direct_cfg = write_config(tmp_path, SMALL + strategy, name="direct.cfg")
    ingest_cfg = write_config(
        tmp_path,
        f"scenario.file = {sim_out}/scenarios.csv\nannuity.T = 10\nseed = 11\n" + strategy,
        name="ingest.cfg",
    )
    out_a, out_b = str(tmp_path / "a"), str(tmp_path / "b")
    assert cli.main(["evaluate", "--config", direct_cfg, "--out", out_a]) == 0
    assert cli.main(["evaluate", "--config", ingest_cfg, "--out", out_b]) == 0
    assert read_bytes(os.path.join(out_a, "report.csv")) == read_bytes(
        os.path.join(out_b, "report.csv")
    )


def test_runtime_domain_error_exits_2_and_cleans_outputs(tmp_path, capsys):
    # r = -0.99 passes static validation but makes 1 + r + pi cross zero
    cfg = write_config(tmp_path, SMALL + "strategy.kind = cumulative\nstrategy.r = -0.99\n")
    out = str(tmp_path / "bad")
    assert cli.main(["evaluate", "--config", cfg, "--out", out]) == 2
    assert "error:" in capsys.readouterr().err
    assert os.listdir(out) == []


# ---------------------------------------------------------------------------
# solve-dp


def test_solve_dp_outputs(tmp_path):
    cfg = write_config(
        tmp_path,
        "n_paths = 60\nhorizon = 8\nannuity.T = 8\nseed = 5\ndp.iterations = 2\n",
    )
    out = str(tmp_path / "dp")
    assert cli.main(["solve-dp", "--config", cfg, "--out", out]) == 0
    assert sorted(os.listdir(out)) == ["dp_trace.csv", "policy.csv"]
    policy = read_bytes(os.path.join(out, "policy.csv")).decode().splitlines()
    assert policy[0] == "t,z,alpha"
    assert len(policy) > 1
    trace = read_bytes(os.path.join(out, "dp_trace.csv")).decode().splitlines()
    assert trace[0] == "iteration,mean_utility"
    assert len(trace) == 1 + 2  # header + one row per iteration
    assert trace[1].startswith("1,") and trace[2].startswith("2,")


# ---------------------------------------------------------------------------
# frontier


def test_frontier_row_counts_match_grids(tmp_path):
    cfg = write_config(
        tmp_path,
        SMALL
        + "frontier.families = static,cumulative\n"
        + "frontier.mix_step = 0.25\n"
        + "frontier.r_min = 0.0\nfrontier.r_max = 0.02\nfrontier.r_step = 0.01\n",
    )
    out = str(tmp_path / "fr")
    assert cli.main(["frontier", "--config", cfg, "--out", out]) == 0
    lines = read_bytes(os.path.join(out, "frontier.csv")).decode().splitlines()
    assert lines[0] == "family,param,shortfall,cvar10"
    rows = [line.split(",") for line in lines[1:]]
    assert len(rows) == 5 + 3  # static 0,.25,.5,.75,1 and r 0,.01,.02
    assert sum(1 for r in rows if r[0] == "static") == 5
    assert sum(1 for r in rows if r[0] == "cumulative") == 3


def test_frontier_unknown_family_exits_1(tmp_path, capsys):
    cfg = write_config(tmp_path, SMALL + "frontier.families = static,mystery\n")
    out = str(tmp_path / "frx")
    assert cli.main(["frontier", "--config", cfg, "--out", out]) == 1
    assert "unknown frontier family" in capsys.readouterr().err
    assert os.listdir(out) == []


# ---------------------------------------------------------------------------
# report


def test_report_one_row_per_strategy_token(tmp_path):
    cfg = write_config(
        tmp_path,
        SMALL + "report.strategies = static_0,static_100,glide_30,cumulative\n",
    )
    out = str(tmp_path / "rep")
    assert cli.main(["report", "--config", cfg, "--out", out]) == 0
    lines = read_bytes(os.path.join(out, "report.csv")).decode().splitlines()
    assert len(lines) == 5
    labels = [line.split(",")[0] for line in lines[1:]]
    assert labels == ["static_0", "static_100", "glide_30", "cumulative"]


def test_report_unknown_token_exits_1(tmp_path, capsys):
    cfg = write_config(tmp_path, SMALL + "report.strategies = static_0,wizardry\n")
    out = str(tmp_path / "repx")
    assert cli.main(["report", "--config", cfg, "--out", out]) == 1
    assert "unknown report strategy token" in capsys.readouterr().err
    assert os.listdir(out) == []


def test_report_deterministic_across_threads(tmp_path):
    cfg = write_config(
        tmp_path,
        "n_paths = 80\nhorizon = 8\nannuity.T = 8\nseed = 3\n"
        + "report.strategies = static_40,cumulative,individual\n",
    )
    outs = [str(tmp_path / f"r{i}") for i in range(3)]
    assert cli.main(["report", "--config", cfg, "--out", outs[0], "--threads", "1"]) == 0
    assert cli.main(["report", "--config", cfg, "--out", outs[1], "--threads", "1"]) == 0
    assert cli.main(["report", "--config", cfg, "--out", outs[2], "--threads", "4"]) == 0
    base = read_bytes(os.path.join(outs[0], "report.csv"))
    assert read_bytes(os.path.join(outs[1], "report.csv")) == base
    assert read_bytes(os.path.join(outs[2], "report.csv")) == base


# ---------------------------------------------------------------------------
# installed entry point


def test_module_entry_point_runs(tmp_path):
    cfg = write_config(tmp_path, SMALL)
    out = str(tmp_path / "mod")
    proc = subprocess.run(
        [sys.executable, "-m", "pensionsim", "simulate", "--config", cfg, "--out", out],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert os.path.exists(os.path.join(out, "scenarios.csv"))
