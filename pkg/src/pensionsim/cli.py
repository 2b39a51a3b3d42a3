"""Command-line runner: config parsing, subcommands and file outputs.

Subcommands: ``simulate`` (scenario CSV + moment report), ``evaluate``
(single-strategy report), ``solve-dp`` (policy export + utility trace),
``frontier`` (family/parameter sweep) and ``report`` (multi-strategy
comparison).  Configuration is a flat ``key = value`` text file with ``#``
comments; every key has a default (see ``--print-defaults``).  All runs are
deterministic: the same config and seed produce byte-identical files, and
``--threads`` never changes results.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .career import default_schedule, schedule_from_csv
from .dp import CombinationStrategy, DpConfig, export_policy_csv, solve_policy
from .engine import SimulationInputs
from .errors import ConfigError, ContractError, DomainError, EngineError, EstimatorError
from .market import AnnuitySpec
from .metrics import (
    REPORT_COLUMNS,
    evaluate_strategy,
    frontier,
)
from .scenario import ModelParams, export_csv, ingest, simulate, summarize
from .strategies import (
    CumulativeTargetStrategy,
    GlidePath,
    IndividualTargetStrategy,
    StaticMixStrategy,
    TargetFrame,
    TargetParams,
    optimize_static_mix,
)

__all__ = ["DEFAULTS", "RunConfig", "main", "parse_config", "run"]

SUBCOMMANDS = ("simulate", "evaluate", "solve-dp", "frontier", "report")

# key -> (default, type); strings keep their raw text
DEFAULTS: dict = {
    "seed": (42, int),
    "threads": (0, int),
    "n_paths": (2000, int),
    "horizon": (41, int),
    "scenario.file": ("", str),
    "model.mean_x": (0.061, float),
    "model.mean_pi": (0.016, float),
    "model.mean_level": (0.025, float),
    "model.mean_slope": (0.005, float),
    "model.std_x": (0.183, float),
    "model.std_pi": (0.015, float),
    "model.std_level": (0.024, float),
    "model.std_slope": (0.004, float),
    "model.ar_x": (0.0, float),
    "model.ar_pi": (0.93, float),
    "model.ar_level": (0.969, float),
    "model.ar_slope": (0.95, float),
    "model.corr_x_pi": (0.11, float),
    "model.corr_x_level": (0.10, float),
    "model.corr_x_slope": (0.0, float),
    "model.corr_pi_level": (0.80, float),
    "model.corr_pi_slope": (0.0, float),
    "model.corr_level_slope": (-0.30, float),
    "model.wage_spread": (0.005, float),
    "model.max_maturity": (30, int),
    "model.slope_reference": (10.0, float),
    "annuity.T": (41, int),
    "annuity.N": (20, int),
    "career.file": ("", str),
    "career.base_salary": (29403.0, float),
    "career.franchise": (13123.0, float),
    "inflation.floor": (0.5, float),
    "strategy.kind": ("cumulative", str),
    "strategy.mix": (0.4602, float),
    "strategy.glide_end": (0.30, float),
    "strategy.r": (0.02, float),
    "strategy.delta": (0.025, float),
    "strategy.target_rr": (0.70, float),
    "dp.grid": ("0.0,0.2,0.4,0.6,0.8,1.0", str),
    "dp.z_min": (1.0, float),
    "dp.z_max": (3.0, float),
    "dp.iterations": (2, int),
    "dp.loess_d": (0.2, float),
    "dp.loess_degree": (1, int),
    "dp.curve_points": (101, int),
    "dp.mode": ("per-contribution", str),
    "report.strategies": (
        "static_0,static_100,static_opt,cumulative,individual,combination",
        str,
    ),
    "report.static_grid_step": (0.01, float),
    "report.cumulative_r": (0.0306, float),
    "report.individual_r": (0.0299, float),
    "report.combination_r": (0.01, float),
    "frontier.families": ("static,cumulative,individual", str),
    "frontier.r_min": (0.0, float),
    "frontier.r_max": (0.05, float),
    "frontier.r_step": (0.0025, float),
    "frontier.mix_step": (0.1, float),
    "evaluation.estimation_lag": (5, int),
    "evaluation.estimation_r": (0.025, float),
}

_STRATEGY_KINDS = ("static", "glide", "bogle", "cumulative", "individual", "combination")


@dataclass
class RunConfig:
    """Validated configuration: defaults overlaid with explicit keys."""

    values: dict = field(default_factory=dict)
    explicit: set = field(default_factory=set)
    source: str = "<defaults>"

    def __getitem__(self, key: str):
        return self.values[key]

    def is_set(self, key: str) -> bool:
        return key in self.explicit


def default_config() -> RunConfig:
    return RunConfig(values={k: v for k, (v, _) in DEFAULTS.items()})


def format_defaults() -> str:
    lines = [f"{key} = {value}" for key, (value, _) in DEFAULTS.items()]
    return "\n".join(lines) + "\n"


def _coerce(key: str, text: str, kind, where: str):
    if kind is str:
        return text
    try:
        if kind is int:
            return int(text, 10)
        return float(text)
    except ValueError:
        name = "integer" if kind is int else "number"
        raise ConfigError(f"{where}: {key} expects {name}, got {text!r}") from None


def parse_config(path: str | None) -> RunConfig:
    """Read a flat key = value file, validate, and fill defaults."""
    cfg = default_config()
    if path is None:
        _validate(cfg)
        return cfg
    cfg.source = str(path)
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{path}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected key = value, got {raw.strip()!r}")
        key, _, text = line.partition("=")
        key = key.strip()
        text = text.strip()
        if key not in DEFAULTS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        cfg.values[key] = _coerce(key, text, DEFAULTS[key][1], where)
        cfg.explicit.add(key)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    v = cfg.values
    if v["n_paths"] < 2:
        raise ConfigError(f"n_paths must be >= 2, got {v['n_paths']}")
    if v["horizon"] < 2:
        raise ConfigError(f"horizon must be >= 2, got {v['horizon']}")
    if v["seed"] < 0:
        raise ConfigError(f"seed must be a non-negative integer, got {v['seed']}")
    if v["threads"] < 0:
        raise ConfigError(f"threads must be >= 0, got {v['threads']}")
    if v["annuity.T"] < 1 or v["annuity.N"] < 1:
        raise ConfigError("annuity.T and annuity.N must be >= 1")
    if v["scenario.file"]:
        generation = [k for k in cfg.explicit if k.startswith("model.") or k in ("n_paths", "horizon")]
        if generation:
            raise ConfigError(
                "exactly one scenario source: scenario.file conflicts with "
                + ", ".join(sorted(generation))
            )
        if not os.path.exists(v["scenario.file"]):
            raise ConfigError(f"scenario.file not found: {v['scenario.file']}")
    if v["career.file"] and not os.path.exists(v["career.file"]):
        raise ConfigError(f"career.file not found: {v['career.file']}")
    if v["strategy.kind"] not in _STRATEGY_KINDS:
        raise ConfigError(
            f"strategy.kind must be one of {', '.join(_STRATEGY_KINDS)}, got {v['strategy.kind']!r}"
        )
    if v["dp.mode"] not in ("per-contribution", "shared"):
        raise ConfigError(f"dp.mode must be per-contribution or shared, got {v['dp.mode']!r}")
    if not 0.0 < v["report.static_grid_step"] <= 1.0:
        raise ConfigError("report.static_grid_step must lie in (0, 1]")
    if v["frontier.r_step"] <= 0.0 or v["frontier.mix_step"] <= 0.0:
        raise ConfigError("frontier step sizes must be positive")
    if v["frontier.r_max"] < v["frontier.r_min"]:
        raise ConfigError("frontier.r_max must be >= frontier.r_min")
    if v["evaluation.estimation_lag"] < 0:
        raise ConfigError("evaluation.estimation_lag must be >= 0")
    try:
        _dp_config(cfg)
        _model_params(cfg).validate()
    except EngineError as exc:
        raise ConfigError(str(exc)) from None


def _model_params(cfg: RunConfig) -> ModelParams:
    v = cfg.values
    return ModelParams(
        mean_x=v["model.mean_x"],
        mean_pi=v["model.mean_pi"],
        mean_level=v["model.mean_level"],
        mean_slope=v["model.mean_slope"],
        std_x=v["model.std_x"],
        std_pi=v["model.std_pi"],
        std_level=v["model.std_level"],
        std_slope=v["model.std_slope"],
        ar_x=v["model.ar_x"],
        ar_pi=v["model.ar_pi"],
        ar_level=v["model.ar_level"],
        ar_slope=v["model.ar_slope"],
        corr_x_pi=v["model.corr_x_pi"],
        corr_x_level=v["model.corr_x_level"],
        corr_x_slope=v["model.corr_x_slope"],
        corr_pi_level=v["model.corr_pi_level"],
        corr_pi_slope=v["model.corr_pi_slope"],
        corr_level_slope=v["model.corr_level_slope"],
        wage_spread=v["model.wage_spread"],
        max_maturity=v["model.max_maturity"],
        slope_reference=v["model.slope_reference"],
    )


def _dp_config(cfg: RunConfig) -> DpConfig:
    v = cfg.values
    try:
        grid = tuple(float(tok) for tok in v["dp.grid"].split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"dp.grid expects comma-separated numbers, got {v['dp.grid']!r}") from None
    return DpConfig(
        grid=grid,
        z_min=v["dp.z_min"],
        z_max=v["dp.z_max"],
        iterations=v["dp.iterations"],
        loess_d=v["dp.loess_d"],
        loess_degree=v["dp.loess_degree"],
        curve_points=v["dp.curve_points"],
    )


def _build_scenarios(cfg: RunConfig, seed: int, threads: int):
    v = cfg.values
    if v["scenario.file"]:
        return ingest(v["scenario.file"], wage_spread=v["model.wage_spread"])
    return simulate(_model_params(cfg), v["n_paths"], v["horizon"], seed, threads=threads)


def _build_inputs(cfg: RunConfig, seed: int, threads: int) -> SimulationInputs:
    v = cfg.values
    scenarios = _build_scenarios(cfg, seed, threads)
    schedule = (
        schedule_from_csv(v["career.file"], v["career.base_salary"], v["career.franchise"])
        if v["career.file"]
        else default_schedule()
    )
    annuity = AnnuitySpec(T=v["annuity.T"], N=v["annuity.N"])
    return SimulationInputs.prepare(
        scenarios, annuity=annuity, schedule=schedule, inflation_floor=v["inflation.floor"]
    )


def _target_params(cfg: RunConfig, r: float) -> TargetParams:
    v = cfg.values
    return TargetParams(
        r=r,
        delta=v["strategy.delta"],
        N=v["annuity.N"],
        T=v["annuity.T"],
        target_rr=v["strategy.target_rr"],
    )


def _strategy_from_config(cfg: RunConfig):
    """Strategy selected by strategy.kind plus its evaluation parameters."""
    v = cfg.values
    kind = v["strategy.kind"]
    params = _target_params(cfg, v["strategy.r"])
    est_params = _target_params(cfg, v["evaluation.estimation_r"])
    ages = tuple(range(25, 25 + v["annuity.T"] + 1))
    if kind == "static":
        return StaticMixStrategy(mix=v["strategy.mix"], label="static"), est_params
    if kind == "glide":
        glide = GlidePath.linear_to(v["strategy.glide_end"], ages=ages)
        return StaticMixStrategy(mix=glide, label="glide"), est_params
    if kind == "bogle":
        return StaticMixStrategy(mix=GlidePath.bogle(ages=ages), label="bogle"), est_params
    if kind == "cumulative":
        return CumulativeTargetStrategy(params), params
    if kind == "individual":
        return IndividualTargetStrategy(params), params
    return CombinationStrategy(params, cfg=_dp_config(cfg), mode=v["dp.mode"]), params


def _report_strategy(token: str, cfg: RunConfig, inputs: SimulationInputs):
    """Strategy instance plus estimator parameters for one report token."""
    v = cfg.values
    est_params = _target_params(cfg, v["evaluation.estimation_r"])
    ages = tuple(range(25, 25 + inputs.T + 1))
    if token == "static_opt":
        step = v["report.static_grid_step"]
        grid = np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)
        mix = optimize_static_mix(inputs, grid, target_rr=v["strategy.target_rr"])
        return StaticMixStrategy(mix=mix, label="static_opt"), est_params
    if token.startswith("static_"):
        pct = float(token[len("static_") :])
        return StaticMixStrategy(mix=pct / 100.0, label=token), est_params
    if token.startswith("glide_"):
        end = float(token[len("glide_") :]) / 100.0
        glide = GlidePath.linear_to(end, ages=ages)
        return StaticMixStrategy(mix=glide, label=token), est_params
    if token == "bogle":
        return StaticMixStrategy(mix=GlidePath.bogle(ages=ages), label="bogle"), est_params
    if token == "cumulative":
        params = _target_params(cfg, v["report.cumulative_r"])
        return CumulativeTargetStrategy(params), params
    if token == "individual":
        params = _target_params(cfg, v["report.individual_r"])
        return IndividualTargetStrategy(params), params
    if token == "combination":
        params = _target_params(cfg, v["report.combination_r"])
        return CombinationStrategy(params, cfg=_dp_config(cfg), mode=v["dp.mode"]), params
    raise ConfigError(f"unknown report strategy token {token!r}")


class _Outputs:
    """Tracks written files so failures leave no partial outputs behind."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.written: list = []
        os.makedirs(out_dir, exist_ok=True)

    def write(self, name: str, text: str) -> str:
        path = os.path.join(self.out_dir, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        self.written.append(path)
        return path

    def write_with(self, name: str, writer) -> str:
        """Route a path-taking writer (e.g. export_csv) through the tracker."""
        path = os.path.join(self.out_dir, name)
        writer(path)
        self.written.append(path)
        return path

    def cleanup(self) -> None:
        for path in self.written:
            try:
                os.unlink(path)
            except OSError:
                pass


def run(cfg: RunConfig, subcommand: str, out_dir: str = ".", seed=None, threads=None) -> list:
    """Execute one subcommand; returns the list of files written."""
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    v = cfg.values
    seed = v["seed"] if seed is None else int(seed)
    threads = v["threads"] if threads is None else int(threads)
    if threads <= 0:
        threads = os.cpu_count() or 1
    outputs = _Outputs(out_dir)
    try:
        if subcommand == "simulate":
            scenarios = _build_scenarios(cfg, seed, threads)
            outputs.write_with("scenarios.csv", lambda p: export_csv(scenarios, p))
            outputs.write_with("moments.csv", summarize(scenarios).write_csv)
        elif subcommand == "evaluate":
            inputs = _build_inputs(cfg, seed, threads)
            strategy, est_params = _strategy_from_config(cfg)
            report = evaluate_strategy(
                inputs, strategy, est_params, estimation_lag=v["evaluation.estimation_lag"]
            )
            text = ",".join(REPORT_COLUMNS) + "\n" + report.csv_row() + "\n"
            outputs.write("report.csv", text)
        elif subcommand == "solve-dp":
            inputs = _build_inputs(cfg, seed, threads)
            params = _target_params(cfg, v["strategy.r"])
            frame = TargetFrame.build(inputs, params)
            policy = solve_policy(inputs, frame, _dp_config(cfg), tau=0)
            outputs.write("policy.csv", export_policy_csv(policy))
            trace = "iteration,mean_utility\n" + "".join(
                f"{i + 1},{u!r}\n" for i, u in enumerate(policy.utility_trace)
            )
            outputs.write("dp_trace.csv", trace)
        elif subcommand == "frontier":
            inputs = _build_inputs(cfg, seed, threads)
            families = {}
            names = [tok.strip() for tok in v["frontier.families"].split(",") if tok.strip()]
            for name in names:
                if name == "static":
                    k = int(round(1.0 / v["frontier.mix_step"]))
                    families[name] = np.linspace(0.0, 1.0, k + 1).round(12)
                elif name in ("cumulative", "individual"):
                    span = v["frontier.r_max"] - v["frontier.r_min"]
                    k = int(round(span / v["frontier.r_step"]))
                    families[name] = np.linspace(
                        v["frontier.r_min"], v["frontier.r_max"], k + 1
                    ).round(12)
                else:
                    raise ConfigError(f"unknown frontier family {name!r}")
            rows = frontier(
                inputs,
                families,
                target_rr=v["strategy.target_rr"],
                delta=v["strategy.delta"],
                N=v["annuity.N"],
            )
            text = "family,param,shortfall,cvar10\n" + "".join(r.csv_row() + "\n" for r in rows)
            outputs.write("frontier.csv", text)
        else:  # report
            inputs = _build_inputs(cfg, seed, threads)
            tokens = [tok.strip() for tok in v["report.strategies"].split(",") if tok.strip()]
            if not tokens:
                raise ConfigError("report.strategies must list at least one strategy")
            lines = [",".join(REPORT_COLUMNS)]
            for token in tokens:
                strategy, est_params = _report_strategy(token, cfg, inputs)
                report = evaluate_strategy(
                    inputs, strategy, est_params, estimation_lag=v["evaluation.estimation_lag"]
                )
                lines.append(report.csv_row())
            outputs.write("report.csv", "\n".join(lines) + "\n")
    except BaseException:
        outputs.cleanup()
        raise
    return outputs.written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pensionsim",
        description="Pension accumulation simulator: scenarios, strategies and reports.",
    )
    sub = parser.add_subparsers(dest="subcommand", metavar="subcommand")
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run the {name} pipeline")
        p.add_argument("--config", default=None, help="flat key = value config file")
        p.add_argument("--out", default=".", help="output directory (default: current)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--threads", type=int, default=None, help="worker threads (0 = all cores)")
        p.add_argument(
            "--print-defaults",
            action="store_true",
            help="print every config key with its default and exit",
        )
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    if args.subcommand is None:
        parser.print_usage(sys.stderr)
        print("error: missing subcommand", file=sys.stderr)
        return 1
    if args.print_defaults:
        sys.stdout.write(format_defaults())
        return 0
    try:
        cfg = parse_config(args.config)
        written = run(cfg, args.subcommand, args.out, seed=args.seed, threads=args.threads)
    except (DomainError, EstimatorError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ArithmeticError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
