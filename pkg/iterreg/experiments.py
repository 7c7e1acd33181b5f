"""Experiment drivers: naive-solve blowup, parameter sweeps, L-curves, method comparison, rates."""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .filters import (FilterSpec, FilterVariant, check_order_conditions, mu_grid)
from .linalg import condition_number, singular_system, solve_general
from .problems import DiscreteProblem, add_noise, simpson_problem, with_exact_solution
from .solvers import (apply_filter_solver, apriori_alpha, iterate_iterated_tikhonov,
                      iterate_landweber, iterate_new_iterated_tikhonov, iterated_tikhonov,
                      landweber, landweber_step_limit, make_source_element,
                      new_iterated_tikhonov, order_optimal_alpha, worst_case_bound)

logger = logging.getLogger(__name__)

TABLE1_POINTS = (0.0, 0.25, 0.5, 0.75, 1.0)
DEFAULT_ALPHA_GRID = tuple(10.0 ** -k for k in range(1, 11))
DEFAULT_DELTAS = (1e-4, 1e-3, 1e-2, 1e-1)
LANDWEBER_FALLBACK = 0.5

# alpha per delta as printed next to the method comparison table
FIXED_ALPHAS = {1e-4: 1.0, 1e-3: 0.9, 1e-2: 1e-3, 1e-1: 1e-3}


@dataclass(frozen=True)
class SweepRecord:
    parameter: float
    error: float
    residual_norm: float
    solution_norm: float
    method: str


@dataclass(frozen=True)
class NaiveSolveRow:
    """Node errors 1 - x_i of an unregularized Simpson solve."""
    n: int
    error_t0: float
    error_t1_4: float
    error_t1_2: float
    error_t3_4: float
    error_t1: float
    max_error: float
    condition_number: float


@dataclass(frozen=True)
class ComparisonRow:
    delta: float
    err_iterated_tikhonov: float
    err_landweber: float
    err_new_iterated: float
    alpha: float


@dataclass(frozen=True)
class ComparisonConfig:
    l: int = 2
    m: int = 100
    r: float = 0.8
    a: float = 0.5
    alphas: Dict[float, float] = field(default_factory=lambda: dict(FIXED_ALPHAS))
    alpha_grid: Tuple[float, ...] = DEFAULT_ALPHA_GRID
    # replace y_exact by A x_exact, removing the quadrature model error
    consistent_data: bool = False


@dataclass(frozen=True)
class RateEstimate:
    slope: float
    deltas: np.ndarray
    alphas: np.ndarray
    median_errors: np.ndarray
    bounds: np.ndarray
    target: float


@dataclass(frozen=True)
class FilterConditionRow:
    method: str
    sigma: float
    q_bound: float
    limit_check: bool
    gamma_fit: float
    qualification_exponent: float
    regularizing: bool


def derive_seed(seed: int, index: int) -> int:
    """Independent, reproducible seed for grid task ``index``."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def best_record(records: Sequence[SweepRecord]) -> SweepRecord:
    """Record with the smallest error; the first one on ties."""
    if not records:
        raise InvalidInputError("No records")
    return min(records, key=lambda record: record.error)


def has_interior_minimum(records: Sequence[SweepRecord]) -> bool:
    """Argmin of the error is attained at neither end of the sweep."""
    index = int(np.argmin([record.error for record in records]))
    return 0 < index < len(records) - 1


def group_by_method(records: Sequence[SweepRecord]) -> Dict[str, List[SweepRecord]]:
    groups: Dict[str, List[SweepRecord]] = {}
    for record in records:
        groups.setdefault(record.method, []).append(record)
    return groups


def _record(parameter: float, problem: DiscreteProblem, x: np.ndarray, y: np.ndarray,
            method: str) -> SweepRecord:
    return SweepRecord(
        parameter=float(parameter),
        error=problem.scaled_error(x),
        residual_norm=float(np.linalg.norm(problem.A @ x - y)),
        solution_norm=float(np.linalg.norm(x)),
        method=method,
    )


def _check_grid(values: Sequence[float], name: str) -> np.ndarray:
    grid = np.asarray(list(values), dtype=np.float64)
    if grid.size == 0:
        raise InvalidInputError(f"{name} must be non-empty")
    return grid


def admissible_landweber_step(A: np.ndarray, a: float) -> float:
    """a when a * mu1^2 < 2, otherwise 0.5 / mu1^2."""
    limit = landweber_step_limit(A)
    if a < limit:
        return a
    substitute = LANDWEBER_FALLBACK * limit / 2.0
    logger.warning(
        f"Landweber step a={a:g} violates a*mu1^2 < 2; using a={substitute:.6g} instead"
    )
    return substitute


# --- naive solve -----------------------------------------------------------


def naive_solve_demo(n_list: Sequence[int]) -> List[NaiveSolveRow]:
    """Solve the Simpson system without regularization for each n.

    Node errors are reported at the collocation node nearest to each of
    t = 0, 1/4, 1/2, 3/4, 1 (exact when 4 divides n).
    """
    rows = []
    for n in n_list:
        problem = simpson_problem(n)
        x = solve_general(problem.A, problem.y_exact)
        errors = problem.x_function - x
        at_points = [float(errors[int(round(t * n))]) for t in TABLE1_POINTS]
        row = NaiveSolveRow(n, *at_points, max_error=float(np.max(np.abs(errors))),
                            condition_number=condition_number(problem.A))
        logger.info(f"naive solve n={n}: max error {row.max_error:.4g}, "
                    f"cond {row.condition_number:.3e}")
        rows.append(row)
    return rows


# --- sweeps ----------------------------------------------------------------


def alpha_sweep(problem: DiscreteProblem, spec_family: FilterSpec, alpha_grid: Sequence[float],
                delta: float, seed: int) -> List[SweepRecord]:
    """One spectral-filter solution per alpha, all from the same noisy data."""
    alphas = _check_grid(alpha_grid, "alpha grid")
    sample = add_noise(problem.y_exact, delta, seed)
    sys = singular_system(problem.A)
    swept = ("m",) if spec_family.variant is FilterVariant.LANDWEBER else ("alpha",)
    method = spec_family.describe(exclude=swept, delta=delta, n=problem.n)

    records = []
    for alpha in alphas:
        solution = apply_filter_solver(sys, sample.y_delta, spec_family.with_alpha(alpha))
        records.append(_record(alpha, problem, solution.x, sample.y_delta, method))
    logger.debug(f"alpha sweep {method}: {len(records)} records")
    return records


def default_iteration_specs(alpha: float = 1e-3, a: float = 0.5, l: int = 4,
                            r: float = 0.8) -> List[FilterSpec]:
    return [
        FilterSpec.iterated_tikhonov(alpha, 1),
        FilterSpec.landweber(a, 1),
        FilterSpec.iterated_fractional_weighted(alpha, l, r, 1),
    ]


def iteration_sweep(problem: DiscreteProblem, specs: Sequence[FilterSpec], m_max: int,
                    delta: float, seed: int) -> List[SweepRecord]:
    """Error trajectory over m = 1..m_max for each iterative method.

    The iteration count stored in each spec is ignored. Records are ordered
    by method, then by m.
    """
    if m_max < 1:
        raise InvalidParameterError(f"m_max must be >= 1, got {m_max}")
    sample = add_noise(problem.y_exact, delta, seed)
    A, y = problem.A, sample.y_delta

    records = []
    for spec in specs:
        if spec.variant is FilterVariant.ITERATED_TIKHONOV:
            iterates = iterate_iterated_tikhonov(A, y, spec.alpha, m_max)
        elif spec.variant is FilterVariant.LANDWEBER:
            spec = FilterSpec.landweber(admissible_landweber_step(A, spec.a), spec.m)
            iterates = iterate_landweber(A, y, spec.a, m_max)
        elif spec.variant is FilterVariant.ITERATED_FRACTIONAL_WEIGHTED:
            iterates = iterate_new_iterated_tikhonov(A, y, spec.alpha, spec.l, spec.r, m_max)
        else:
            raise InvalidParameterError(f"{spec.variant.value} has no iteration")

        method = spec.describe(exclude=("m",), delta=delta, n=problem.n)
        for k, x in enumerate(iterates, start=1):
            records.append(_record(k, problem, x, y, method))
        logger.info(f"iteration sweep {method}: best error "
                    f"{best_record(records[-m_max:]).error:.4g}")
    return records


def lcurve_data(problem: DiscreteProblem, alpha_grid: Sequence[float],
                delta_list: Sequence[float], seed: int) -> List[SweepRecord]:
    """Tikhonov residual and solution norms across alpha, one block per delta."""
    deltas = _check_grid(delta_list, "delta list")
    records = []
    for i, delta in enumerate(deltas):
        records += alpha_sweep(problem, FilterSpec.tikhonov(1.0), alpha_grid, delta,
                               derive_seed(seed, i))
    return records


# --- method comparison -----------------------------------------------------


def _fixed_alpha(alphas: Dict[float, float], delta: float) -> float:
    for key, value in alphas.items():
        if np.isclose(key, delta, rtol=1e-9, atol=0.0):
            return value
    raise InvalidInputError(f"No alpha configured for delta={delta:g}")


def _comparison_row(problem: DiscreteProblem, y: np.ndarray, delta: float, alpha: float,
                    config: ComparisonConfig, a: float) -> ComparisonRow:
    A = problem.A
    return ComparisonRow(
        delta=float(delta),
        err_iterated_tikhonov=problem.scaled_error(iterated_tikhonov(A, y, alpha, config.m).x),
        err_landweber=problem.scaled_error(landweber(A, y, a, config.m).x),
        err_new_iterated=problem.scaled_error(
            new_iterated_tikhonov(A, y, alpha, config.l, config.r, config.m).x
        ),
        alpha=float(alpha),
    )


def _optimal_row(problem: DiscreteProblem, y: np.ndarray, delta: float,
                 config: ComparisonConfig, a: float) -> ComparisonRow:
    # per-method oracle choice: alpha over the grid, Landweber over its m trajectory
    A = problem.A
    iterated = [problem.scaled_error(iterated_tikhonov(A, y, alpha, config.m).x)
                for alpha in config.alpha_grid]
    new = [problem.scaled_error(new_iterated_tikhonov(A, y, alpha, config.l, config.r,
                                                      config.m).x)
           for alpha in config.alpha_grid]
    landweber_errors = [problem.scaled_error(x) for x in iterate_landweber(A, y, a, config.m)]
    best = int(np.argmin(new))
    return ComparisonRow(
        delta=float(delta),
        err_iterated_tikhonov=float(min(iterated)),
        err_landweber=float(min(landweber_errors)),
        err_new_iterated=float(new[best]),
        alpha=float(config.alpha_grid[best]),
    )


def comparison_table(problem: DiscreteProblem, delta_list: Sequence[float],
                     config: Optional[ComparisonConfig] = None, seed: int = 42,
                     alpha_mode: str = "fixed") -> List[ComparisonRow]:
    """Iterated Tikhonov, Landweber and the new iterated method on shared noisy data.

    ``alpha_mode="fixed"`` takes alpha from ``config.alphas``; ``"optimal"``
    reports each method at its best grid parameter. ``config.consistent_data``
    drops the quadrature model error so only the noise separates the rows.
    """
    if alpha_mode not in ("fixed", "optimal"):
        raise InvalidInputError(f"Unknown alpha mode: {alpha_mode}")
    config = config or ComparisonConfig()
    deltas = _check_grid(delta_list, "delta list")
    if config.consistent_data:
        problem = with_exact_solution(problem, problem.x_exact)
    a = admissible_landweber_step(problem.A, config.a)

    rows = []
    for i, delta in enumerate(deltas):
        y = add_noise(problem.y_exact, delta, derive_seed(seed, i)).y_delta
        if alpha_mode == "fixed":
            row = _comparison_row(problem, y, delta, _fixed_alpha(config.alphas, delta),
                                  config, a)
        else:
            row = _optimal_row(problem, y, delta, config, a)
        logger.info(f"comparison delta={delta:g}: {row}")
        rows.append(row)
    return rows


# --- convergence rates -----------------------------------------------------


ALPHA_RULES = ("order-optimal", "apriori")


def _rule_alpha(rule: str, delta: float, E: float, sigma: float, m: int) -> float:
    if rule == "order-optimal":
        return order_optimal_alpha(delta, E, sigma)
    if rule == "apriori":
        return apriori_alpha(delta, E, sigma, m)
    raise InvalidInputError(f"Unknown alpha rule: {rule}")


def rate_estimate(problem: DiscreteProblem, spec_family: FilterSpec, sigma: float, E: float,
                  m: int, delta_list: Sequence[float], seeds: Sequence[int],
                  alpha_rule: str = "order-optimal", source_seed: int = 0) -> RateEstimate:
    """Fit the log-log slope of the median error against delta.

    The exact solution is replaced by a source element of smoothness sigma
    so the attainable rate sigma/(sigma+1) is known.
    """
    deltas = np.asarray(list(delta_list), dtype=np.float64)
    if deltas.size < 3:
        raise InvalidInputError(f"Rate fit needs at least 3 noise levels, got {deltas.size}")
    if not seeds:
        raise InvalidInputError("Rate fit needs at least one seed")
    if np.log10(deltas.max() / deltas.min()) < 3:
        logger.warning("Noise levels span less than 3 decades; slope will be unreliable")
    if "m" in spec_family.parameters:
        spec_family = spec_family.with_iterations(m)
    elif m != 1:
        raise InvalidParameterError(f"{spec_family.variant.value} is not iterated; m must be 1")

    sys = singular_system(problem.A)
    source = make_source_element(sys, sigma, E, seed=source_seed)
    target = with_exact_solution(problem, source.x)

    alphas = np.empty(deltas.size)
    medians = np.empty(deltas.size)
    for i, delta in enumerate(deltas):
        alphas[i] = _rule_alpha(alpha_rule, delta, E, sigma, m)
        spec = spec_family.with_alpha(alphas[i])
        errors = [
            target.scaled_error(apply_filter_solver(
                sys, add_noise(target.y_exact, delta, derive_seed(s, i)).y_delta, spec).x)
            for s in seeds
        ]
        medians[i] = np.median(errors)
        logger.debug(f"rate delta={delta:g} alpha={alphas[i]:.3e} median error {medians[i]:.3e}")

    slope, _ = np.polyfit(np.log(deltas), np.log(medians), 1)
    bounds = np.array([worst_case_bound(delta, E, sigma) for delta in deltas])
    return RateEstimate(slope=float(slope), deltas=deltas, alphas=alphas, median_errors=medians,
                        bounds=bounds, target=sigma / (sigma + 1.0))


def rate_records(estimate: RateEstimate, spec_family: FilterSpec) -> List[SweepRecord]:
    """Rate points as sweep records over delta; norms are not tracked and set to 0."""
    method = spec_family.describe(exclude=("alpha",), slope=estimate.slope)
    return [
        SweepRecord(parameter=float(d), error=float(e), residual_norm=0.0, solution_norm=0.0,
                    method=method)
        for d, e in zip(estimate.deltas, estimate.median_errors)
    ]


# --- filter conditions -----------------------------------------------------


def default_condition_specs() -> List[Tuple[FilterSpec, float]]:
    """Each filter family paired with its qualification sigma."""
    return [
        (FilterSpec.tikhonov(1.0), 2.0),
        (FilterSpec.landweber(0.5, 1), 2.0),
        (FilterSpec.iterated_tikhonov(1.0, 2), 4.0),
        (FilterSpec.weighted_ii(1.0, 4), 2.0),
        (FilterSpec.fractional_tikhonov(1.0, 0.8), 2.0),
        (FilterSpec.fractional_weighted(1.0, 4, 0.8), 2.0),
        (FilterSpec.iterated_fractional_weighted(1.0, 2, 0.8, 2), 4.0),
    ]


def filter_condition_table(specs: Optional[Sequence[Tuple[FilterSpec, float]]] = None,
                           alpha_grid: Sequence[float] = tuple(10.0 ** -k for k in range(1, 9)),
                           mu1: float = 1.0) -> List[FilterConditionRow]:
    """Grid checks of the regularizing-filter and order conditions per family."""
    specs = default_condition_specs() if specs is None else specs
    alphas = _check_grid(alpha_grid, "alpha grid")
    grid = mu_grid(mu1, alphas)

    rows = []
    for spec, sigma in specs:
        report = check_order_conditions(spec, sigma, grid, alphas, mu1)
        # Landweber with a*mu1^2 in (1, 2) overshoots to at most 2
        q_max = 2.0 if spec.variant is FilterVariant.LANDWEBER and spec.a * mu1**2 > 1 else 1.0
        rows.append(FilterConditionRow(
            method=spec.describe(exclude=("alpha", "m") if spec.variant is
                                 FilterVariant.LANDWEBER else ("alpha",)),
            sigma=float(sigma),
            q_bound=report.q_bound,
            limit_check=report.limit_check,
            gamma_fit=float("nan") if report.gamma_fit is None else report.gamma_fit,
            qualification_exponent=(float("nan") if report.qualification_exponent is None
                                    else report.qualification_exponent),
            regularizing=report.satisfies_filter_conditions(q_max),
        ))
    return rows
