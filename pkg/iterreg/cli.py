"""Command-line interface for iterreg."""

import argparse
import logging
import os
import sys
from dataclasses import dataclass, field, fields
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import psutil

from . import __version__
from .display import (print_comparison, print_filter_conditions, print_records, print_rate,
                      print_table1)
from .errors import ConfigError, InvalidInputError, IterRegError
from .experiments import (ALPHA_RULES, DEFAULT_ALPHA_GRID, DEFAULT_DELTAS, ComparisonConfig,
                          alpha_sweep, best_record, comparison_table, default_iteration_specs,
                          filter_condition_table, iteration_sweep, lcurve_data,
                          naive_solve_demo, rate_estimate, rate_records)
from .filters import VARIANT_PARAMETERS, FilterSpec, FilterVariant
from .io import read_config_file, save_json, save_problem_json, save_records_csv, save_rows_csv
from .problems import MAX_POINTS, DiscreteProblem, make_problem

logger = logging.getLogger(__name__)

EXPERIMENTS = (
    "demo-table1",
    "sweep-alpha",
    "sweep-iterations",
    "lcurve",
    "compare-table2",
    "rate",
    "check-filters",
    "export-problem",
)
PROBLEMS = ("laplace", "simpson", "synthetic")
FORMATS = ("csv", "json")
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


@dataclass
class RunConfig:
    """One experiment run. Field names double as JSON config keys."""
    experiment: str
    problem: str = "laplace"
    n: List[int] = field(default_factory=lambda: [32])
    method: str = "tikhonov"
    alpha: float = 1e-3
    l: int = 4
    r: float = 0.8
    m: int = 100
    a: float = 0.5
    sigma: float = 2.0
    E: float = 1.0
    delta: float = 1e-4
    delta_list: List[float] = field(default_factory=lambda: list(DEFAULT_DELTAS))
    alpha_grid: List[float] = field(default_factory=lambda: list(DEFAULT_ALPHA_GRID))
    m_max: int = 100
    seed: int = 42
    seeds: int = 10
    alpha_mode: str = "fixed"
    alpha_rule: str = "order-optimal"
    consistent_data: bool = False
    out: Optional[str] = None
    format: str = "csv"
    quiet: bool = False


# Per-experiment defaults layered over the RunConfig defaults.
EXPERIMENT_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "demo-table1": {"problem": "simpson", "n": [4, 8, 16, 32]},
    "sweep-alpha": {"delta": 1e-3},
    "compare-table2": {"l": 2},
    "rate": {"problem": "synthetic", "method": "iterated-tikhonov", "m": 1,
             "delta_list": [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]},
}

_INT_FIELDS = {"l", "m", "m_max", "seed", "seeds"}
_FLOAT_FIELDS = {"alpha", "r", "a", "sigma", "E", "delta"}
_INT_LIST_FIELDS = {"n"}
_FLOAT_LIST_FIELDS = {"delta_list", "alpha_grid"}
_BOOL_FIELDS = {"quiet", "consistent_data"}
_CHOICES = {
    "experiment": EXPERIMENTS,
    "problem": PROBLEMS,
    "method": tuple(variant.value for variant in FilterVariant),
    "format": FORMATS,
    "alpha_mode": ("fixed", "optimal"),
    "alpha_rule": ALPHA_RULES,
}


def setup_logging(debug: bool = False, log_file: Optional[str] = None):
    """Configure root logging once per process invocation."""
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file, mode="w"))
    logging.basicConfig(
        level=logging.DEBUG if debug else logging.WARNING,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )


def log_memory_usage(experiment: str, stage: str) -> float:
    """Resident memory of this process in MB, logged for one stage of an experiment run.

    Returns 0.0 when the process table cannot be read.
    """
    try:
        rss = psutil.Process(os.getpid()).memory_info().rss
    except (psutil.Error, OSError) as e:
        logger.warning(f"{experiment} {stage}: resident memory unavailable ({e})")
        return 0.0
    memory_mb = rss / 1024 / 1024
    logger.debug(f"{experiment} {stage}: resident memory {memory_mb:.2f} MB")
    return memory_mb


# --- configuration ---------------------------------------------------------


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError([message])


def build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False, allow_abbrev=False)
    options = common.add_argument_group("run options")
    s = argparse.SUPPRESS
    options.add_argument("--config", default=s, help="JSON file with RunConfig fields")
    options.add_argument("--problem", default=s, help="laplace, simpson or synthetic")
    options.add_argument("--n", default=s, help="Comma-separated problem sizes")
    options.add_argument("--method", default=s, help="Filter family for sweeps and rates")
    for name in ("alpha", "l", "r", "m", "a", "sigma", "E", "delta", "m-max", "seeds"):
        options.add_argument(f"--{name}", default=s)
    options.add_argument("--delta-list", default=s, help="Comma-separated noise levels")
    options.add_argument("--alpha-grid", default=s, help="Comma-separated alpha values")
    options.add_argument("--seed", default=s, help="RNG seed (default 42)")
    options.add_argument("--alpha-mode", default=s, help="fixed or optimal (compare-table2)")
    options.add_argument("--alpha-rule", default=s, help="order-optimal or apriori (rate)")
    options.add_argument("--consistent-data", default=s, action="store_true",
                         help="Use y = A x_exact (compare-table2)")
    options.add_argument("--out", default=s, help="Output file")
    options.add_argument("--format", default=s, help="csv or json")
    options.add_argument("--quiet", default=s, action="store_true",
                         help="Only print the summary line")
    options.add_argument("--debug", action="store_true", help="Enable debug logging")
    options.add_argument("--log-file", default=None, help="Also write the log to this file")

    parser = _ArgumentParser(
        prog="iterreg",
        description="Filter-based regularization for discrete ill-posed problems",
        allow_abbrev=False,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="experiment", metavar="experiment")
    subparsers.required = True
    for name in EXPERIMENTS:
        subparsers.add_parser(name, parents=[common], allow_abbrev=False)
    return parser


def _split(value: Any) -> List[Any]:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def _to_int(value: Any) -> int:
    if isinstance(value, bool):
        raise ValueError("boolean")
    number = float(value)
    if not number.is_integer():
        raise ValueError("not an integer")
    return int(number)


def _convert(name: str, value: Any) -> Any:
    if name in _INT_FIELDS:
        return _to_int(value)
    if name in _FLOAT_FIELDS:
        return float(value)
    if name in _INT_LIST_FIELDS:
        return [_to_int(item) for item in _split(value)]
    if name in _FLOAT_LIST_FIELDS:
        return [float(item) for item in _split(value)]
    if name in _BOOL_FIELDS:
        if not isinstance(value, bool):
            raise ValueError("expected true or false")
        return value
    if name == "out":
        return None if value is None else str(value)
    return str(value)


def _check_n(problem: str, sizes: List[int]) -> List[str]:
    problems = []
    if not sizes:
        problems.append("n: at least one size is required")
    for size in sizes:
        if problem == "simpson" and (size % 2 or not 4 <= size <= MAX_POINTS):
            problems.append(f"n: {size} must be even and in [4, {MAX_POINTS}] for simpson")
        elif problem != "simpson" and not 1 <= size <= MAX_POINTS:
            problems.append(f"n: {size} must be in [1, {MAX_POINTS}]")
    return problems


def _check_ranges(config: RunConfig) -> List[str]:
    problems = []
    for name, choices in _CHOICES.items():
        if getattr(config, name) not in choices:
            problems.append(f"{name}: '{getattr(config, name)}' is not one of {', '.join(choices)}")
    checks = [
        ("alpha", config.alpha > 0, "must be > 0"),
        ("l", config.l >= 0, "must be >= 0"),
        ("r", config.r >= 0.5, "must be >= 1/2"),
        ("m", config.m >= 1, "must be >= 1"),
        ("a", config.a > 0, "must be > 0"),
        ("sigma", config.sigma >= 0, "must be >= 0"),
        ("E", config.E > 0, "must be > 0"),
        ("delta", config.delta >= 0, "must be >= 0"),
        ("m_max", config.m_max >= 1, "must be >= 1"),
        ("seed", config.seed >= 0, "must be >= 0"),
        ("seeds", config.seeds >= 1, "must be >= 1"),
        ("delta_list", bool(config.delta_list) and min(config.delta_list) >= 0,
         "must be a non-empty list of values >= 0"),
        ("alpha_grid", bool(config.alpha_grid) and min(config.alpha_grid) > 0,
         "must be a non-empty list of values > 0"),
    ]
    problems += [f"{name}: {message}" for name, ok, message in checks if not ok]
    if config.experiment == "rate" and config.delta_list and min(config.delta_list) <= 0:
        problems.append("delta_list: rate needs noise levels > 0")
    if config.problem != "synthetic" or config.experiment != "rate":
        problems += _check_n(config.problem, config.n)
    if config.experiment == "export-problem":
        if len(config.n) != 1:
            problems.append("n: export-problem takes a single size")
        if not config.out:
            problems.append("out: export-problem needs an output file")
    return problems


def parse_config(argv: Optional[Sequence[str]] = None,
                 config_file: Optional[str] = None) -> Tuple[RunConfig, argparse.Namespace]:
    """Merge defaults, the JSON config file and command-line flags into a RunConfig.

    Every validation problem is collected and raised in a single ConfigError.
    """
    args = build_parser().parse_args(argv)
    given = {key.replace("-", "_"): value for key, value in vars(args).items()}
    config_file = given.pop("config", config_file)
    given.pop("debug", None)
    given.pop("log_file", None)
    experiment = given.pop("experiment")

    values: Dict[str, Any] = dict(EXPERIMENT_DEFAULTS.get(experiment, {}))
    problems = []
    known = {f.name for f in fields(RunConfig)}
    if config_file:
        document = read_config_file(config_file)
        if "experiment" in document and document["experiment"] != experiment:
            problems.append(f"experiment: config file says '{document['experiment']}' "
                            f"but '{experiment}' was requested")
        for key, value in document.items():
            if key not in known:
                problems.append(f"{key}: unknown field")
            elif key != "experiment":
                values[key] = value
    values.update(given)

    converted: Dict[str, Any] = {}
    for key, value in values.items():
        try:
            converted[key] = _convert(key, value)
        except (TypeError, ValueError) as e:
            problems.append(f"{key}: invalid value {value!r} ({e})")

    config = RunConfig(experiment=experiment, **converted)
    problems += _check_ranges(config)
    if problems:
        raise ConfigError(problems)
    logger.debug(f"Run configuration: {config}")
    return config, args


# --- running ---------------------------------------------------------------


def _family(config: RunConfig) -> FilterSpec:
    variant = FilterVariant(config.method)
    return FilterSpec(variant, **{name: getattr(config, name)
                                  for name in VARIANT_PARAMETERS[variant]})


def _problems(config: RunConfig) -> List[DiscreteProblem]:
    return [make_problem(config.problem, n) for n in config.n]


def _rate_problem(config: RunConfig) -> DiscreteProblem:
    if config.problem == "synthetic":
        return make_problem("synthetic", MAX_POINTS)
    return make_problem(config.problem, config.n[0])


def _execute(config: RunConfig) -> Tuple[List[Any], bool, str]:
    """Run the experiment; returns (rows, rows are SweepRecords, summary line)."""
    experiment = config.experiment
    if experiment == "demo-table1":
        rows = naive_solve_demo(config.n)
        worst = max(rows, key=lambda row: row.max_error)
        if not config.quiet:
            print_table1(rows)
        return rows, False, f"{experiment}: max node error {worst.max_error:.6g} at n={worst.n}"

    if experiment == "compare-table2":
        comparison = ComparisonConfig(l=config.l, m=config.m, r=config.r, a=config.a,
                                      alpha_grid=tuple(config.alpha_grid),
                                      consistent_data=config.consistent_data)
        rows = []
        for problem in _problems(config):
            rows += comparison_table(problem, config.delta_list, comparison, config.seed,
                                     config.alpha_mode)
        best = min(rows, key=lambda row: row.err_new_iterated)
        if not config.quiet:
            print_comparison(rows)
        return rows, False, (f"{experiment}: min error {best.err_new_iterated:.6g} "
                             f"at delta={best.delta:g}")

    if experiment == "rate":
        family = _family(config)
        seeds = [config.seed + i for i in range(config.seeds)]
        estimate = rate_estimate(_rate_problem(config), family, config.sigma, config.E,
                                 config.m, config.delta_list, seeds, config.alpha_rule,
                                 source_seed=config.seed)
        if not config.quiet:
            print_rate(estimate)
        best = int(np.argmin(estimate.median_errors))
        return rate_records(estimate, family), True, (
            f"{experiment}: slope {estimate.slope:.4f} (optimal {estimate.target:.4f}), "
            f"min error {estimate.median_errors[best]:.6g} at delta={estimate.deltas[best]:g}"
        )

    if experiment == "export-problem":
        (problem,) = _problems(config)
        return [problem], False, (f"{experiment}: {problem.kind} n={problem.n}, "
                                  f"quadrature residual {problem.quadrature_residual:.6g}")

    if experiment == "check-filters":
        rows = filter_condition_table(alpha_grid=config.alpha_grid)
        if not config.quiet:
            print_filter_conditions(rows)
        passed = sum(row.regularizing for row in rows)
        return rows, False, f"{experiment}: {passed}/{len(rows)} filters pass the grid checks"

    records = []
    parameter_name = "m" if experiment == "sweep-iterations" else "alpha"
    for i, problem in enumerate(_problems(config)):
        if experiment == "sweep-alpha":
            records += alpha_sweep(problem, _family(config), config.alpha_grid, config.delta,
                                   config.seed)
        elif experiment == "sweep-iterations":
            specs = default_iteration_specs(config.alpha, config.a, config.l, config.r)
            records += iteration_sweep(problem, specs, config.m_max, config.delta, config.seed)
        else:
            records += lcurve_data(problem, config.alpha_grid, config.delta_list, config.seed)
    if not config.quiet:
        print_records(records, parameter_name)
    best = best_record(records)
    return records, True, (f"{experiment}: min error {best.error:.6g} at "
                           f"{parameter_name}={best.parameter:g} ({best.method})")


def run(config: RunConfig) -> int:
    """Run one experiment, write its output file and print a one-line summary."""
    logger.info(f"Starting {config.experiment}")
    log_memory_usage(config.experiment, "before run")
    rows, are_records, summary = _execute(config)

    if config.out:
        if config.experiment == "export-problem":
            save_problem_json(rows[0], config.out)
        elif config.format == "json":
            save_json(rows, config.out, config.seed)
        elif are_records:
            save_records_csv(rows, config.out, config.seed)
        else:
            save_rows_csv(rows, config.out, config.seed)
        logger.info(f"Results saved to {config.out}")

    log_memory_usage(config.experiment, "after run")
    print(summary)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for the command-line interface."""
    try:
        config, args = parse_config(argv)
    except ConfigError as e:
        for problem in e.problems:
            print(f"error: {problem}", file=sys.stderr)
        return 2
    setup_logging(args.debug, args.log_file)

    try:
        return run(config)
    except InvalidInputError as e:
        logger.error(f"Invalid input: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (IterRegError, np.linalg.LinAlgError) as e:
        logger.error(f"Numerical failure in {config.experiment}: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
