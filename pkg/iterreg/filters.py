"""Spectral filter functions and numeric checks of the regularizing-filter conditions.

A filter q(alpha, mu) damps the 1/mu amplification of the singular value
expansion.  Every variant is evaluated together with its complement
1 - q, each computed without cancellation, so that iterated and fractional
forms stay accurate both for tiny mu (q near 0) and near mu1 (q near 1).
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidInputError, InvalidParameterError

logger = logging.getLogger(__name__)

WEIGHT_ZERO_TOL = 1e-15
CONDITION_SLACK = 1e-12
LIMIT_ALPHA = 1e-12
LIMIT_TOL = 0.05


class FilterVariant(str, Enum):
    TIKHONOV = "tikhonov"
    LANDWEBER = "landweber"
    ITERATED_TIKHONOV = "iterated-tikhonov"
    WEIGHTED_II = "weighted-ii"
    FRACTIONAL_TIKHONOV = "fractional-tikhonov"
    FRACTIONAL_WEIGHTED = "fractional-weighted"
    ITERATED_FRACTIONAL_WEIGHTED = "iterated-fractional-weighted"


# Parameters each variant takes; anything else must be left unset.
VARIANT_PARAMETERS = {
    FilterVariant.TIKHONOV: ("alpha",),
    FilterVariant.LANDWEBER: ("a", "m"),
    FilterVariant.ITERATED_TIKHONOV: ("alpha", "m"),
    FilterVariant.WEIGHTED_II: ("alpha", "l"),
    FilterVariant.FRACTIONAL_TIKHONOV: ("alpha", "r"),
    FilterVariant.FRACTIONAL_WEIGHTED: ("alpha", "l", "r"),
    FilterVariant.ITERATED_FRACTIONAL_WEIGHTED: ("alpha", "l", "r", "m"),
}


@dataclass(frozen=True)
class FilterSpec:
    """A regularization method family together with its parameters."""
    variant: FilterVariant
    alpha: Optional[float] = None
    l: Optional[int] = None
    r: Optional[float] = None
    m: Optional[int] = None
    a: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "variant", FilterVariant(self.variant))
        required = VARIANT_PARAMETERS[self.variant]
        problems = []
        for name in ("alpha", "l", "r", "m", "a"):
            value = getattr(self, name)
            if name in required and value is None:
                problems.append(f"{self.variant.value} requires '{name}'")
            elif name not in required and value is not None:
                problems.append(f"{self.variant.value} does not take '{name}'")

        if self.alpha is not None and not (np.isfinite(self.alpha) and self.alpha > 0):
            problems.append(f"alpha must be > 0, got {self.alpha}")
        if self.l is not None and (not _is_int(self.l) or self.l < 0):
            problems.append(f"l must be a non-negative integer, got {self.l}")
        if self.r is not None and not (np.isfinite(self.r) and self.r >= 0.5):
            problems.append(f"r must be >= 1/2, got {self.r}")
        if self.m is not None and (not _is_int(self.m) or self.m < 1):
            problems.append(f"m must be an integer >= 1, got {self.m}")
        if self.a is not None and not (np.isfinite(self.a) and self.a > 0):
            problems.append(f"a must be > 0, got {self.a}")
        if problems:
            raise InvalidParameterError("; ".join(problems))

    @classmethod
    def tikhonov(cls, alpha: float) -> "FilterSpec":
        return cls(FilterVariant.TIKHONOV, alpha=alpha)

    @classmethod
    def landweber(cls, a: float, m: int) -> "FilterSpec":
        return cls(FilterVariant.LANDWEBER, a=a, m=m)

    @classmethod
    def iterated_tikhonov(cls, alpha: float, m: int) -> "FilterSpec":
        return cls(FilterVariant.ITERATED_TIKHONOV, alpha=alpha, m=m)

    @classmethod
    def weighted_ii(cls, alpha: float, l: int) -> "FilterSpec":
        return cls(FilterVariant.WEIGHTED_II, alpha=alpha, l=l)

    @classmethod
    def fractional_tikhonov(cls, alpha: float, r: float) -> "FilterSpec":
        return cls(FilterVariant.FRACTIONAL_TIKHONOV, alpha=alpha, r=r)

    @classmethod
    def fractional_weighted(cls, alpha: float, l: int, r: float) -> "FilterSpec":
        return cls(FilterVariant.FRACTIONAL_WEIGHTED, alpha=alpha, l=l, r=r)

    @classmethod
    def iterated_fractional_weighted(cls, alpha: float, l: int, r: float, m: int) -> "FilterSpec":
        return cls(FilterVariant.ITERATED_FRACTIONAL_WEIGHTED, alpha=alpha, l=l, r=r, m=m)

    @property
    def effective_alpha(self) -> float:
        """alpha, or 1/m for Landweber (the iteration count plays the role of 1/alpha)."""
        if self.variant is FilterVariant.LANDWEBER:
            return 1.0 / self.m
        return self.alpha

    def with_alpha(self, alpha: float) -> "FilterSpec":
        """Same family with a new regularization parameter."""
        if self.variant is FilterVariant.LANDWEBER:
            return landweber_alpha_form(self.a, alpha)
        return replace(self, alpha=alpha)

    def with_iterations(self, m: int) -> "FilterSpec":
        if "m" not in VARIANT_PARAMETERS[self.variant]:
            raise InvalidParameterError(f"{self.variant.value} is not iterated")
        return replace(self, m=m)

    def describe(self, exclude: Sequence[str] = (), **extra) -> str:
        """Compact descriptor, safe inside a CSV field.

        ``exclude`` drops swept parameters; ``extra`` appends run context
        such as the noise level.
        """
        items = [
            f"{name}={getattr(self, name):g}"
            for name in VARIANT_PARAMETERS[self.variant]
            if name not in exclude
        ]
        items += [f"{key}={value:g}" for key, value in extra.items()]
        return f"{self.variant.value}[{';'.join(items)}]"

    @property
    def parameters(self) -> Tuple[str, ...]:
        return VARIANT_PARAMETERS[self.variant]


def _is_int(value) -> bool:
    return isinstance(value, (int, np.integer)) and not isinstance(value, bool)


def landweber_alpha_form(a: float, alpha: float) -> FilterSpec:
    """Landweber filter 1 - (1 - a mu^2)^(1/alpha) with 1/alpha rounded to an iteration count."""
    if not alpha > 0:
        raise InvalidParameterError(f"alpha must be > 0, got {alpha}")
    return FilterSpec.landweber(a=a, m=max(1, int(round(1.0 / alpha))))


# --- evaluation ------------------------------------------------------------


def _check_mu(mu: np.ndarray, mu1: float) -> np.ndarray:
    if not (np.isfinite(mu1) and mu1 > 0):
        raise InvalidInputError(f"mu1 must be > 0, got {mu1}")
    if mu.size and (np.any(~np.isfinite(mu)) or np.any(mu <= 0) or np.any(mu > mu1 * (1 + 1e-12))):
        raise InvalidInputError(f"mu must lie in (0, mu1={mu1:g}]")
    return np.minimum(mu, mu1)


def _weight(mu: np.ndarray, mu1: float, l: int) -> np.ndarray:
    """(1 - (mu/mu1)^2)^l, with the base set to exactly 0 at mu = mu1."""
    base = 1.0 - (mu / mu1) ** 2
    base = np.where(np.abs(base) < WEIGHT_ZERO_TOL, 0.0, base)
    return np.power(base, l)


def _log_q(q: np.ndarray, s: np.ndarray) -> np.ndarray:
    """log(q) accurate whether q is tiny or close to 1."""
    with np.errstate(divide="ignore"):
        return np.where(s < 0.5, np.log1p(-np.minimum(s, 0.5)), np.log(q))


def _log_s(q: np.ndarray, s: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.where(q < 0.5, np.log1p(-np.minimum(q, 0.5)), np.log(s))


def _power_pair(q, s, r: float):
    """(q^r, 1 - q^r)."""
    log_q = _log_q(q, s)
    return np.exp(r * log_q), -np.expm1(r * log_q)


def _iterate_pair(q, s, m: int):
    """(1 - (1-q)^m, (1-q)^m)."""
    log_s = _log_s(q, s)
    with np.errstate(invalid="ignore"):
        return -np.expm1(m * log_s), np.exp(m * log_s)


def _tikhonov_pair(mu2, penalty):
    denominator = mu2 + penalty
    return mu2 / denominator, penalty / denominator


def _landweber_pair(mu: np.ndarray, a: float, m: int):
    step = a * mu**2
    contraction = 1.0 - step
    with np.errstate(invalid="ignore", divide="ignore"):
        log_c = np.log1p(-np.minimum(step, 1.0))
        q_pos, s_pos = -np.expm1(m * log_c), np.exp(m * log_c)
    # 1 < a mu^2 < 2: the contraction factor is negative, m is an integer
    s_neg = np.power(contraction, m)
    negative = contraction < 0
    return np.where(negative, 1.0 - s_neg, q_pos), np.where(negative, s_neg, s_pos)


def filter_pair(spec: FilterSpec, mu, mu1: float) -> Tuple[np.ndarray, np.ndarray]:
    """Return ``(q, 1 - q)`` for ``spec`` on an array of singular values."""
    mu = _check_mu(np.atleast_1d(np.asarray(mu, dtype=np.float64)), float(mu1))
    variant = spec.variant

    if variant is FilterVariant.LANDWEBER:
        if spec.a * mu1**2 >= 2.0:
            raise InvalidParameterError(
                f"Landweber step a={spec.a:g} violates a*mu1^2 < 2 (mu1={mu1:g})"
            )
        return _landweber_pair(mu, spec.a, spec.m)

    mu2 = mu**2
    if variant in (FilterVariant.TIKHONOV, FilterVariant.ITERATED_TIKHONOV,
                   FilterVariant.FRACTIONAL_TIKHONOV):
        q, s = _tikhonov_pair(mu2, np.full_like(mu2, spec.alpha))
    else:
        q, s = _tikhonov_pair(mu2, spec.alpha * _weight(mu, mu1, spec.l))

    if spec.r is not None:
        q, s = _power_pair(q, s, spec.r)
    if spec.m is not None:
        q, s = _iterate_pair(q, s, spec.m)
    return q, s


def filter_values(spec: FilterSpec, mu, mu1: float) -> np.ndarray:
    return filter_pair(spec, mu, mu1)[0]


def residual_values(spec: FilterSpec, mu, mu1: float) -> np.ndarray:
    """1 - q, accurate where q is close to 1."""
    return filter_pair(spec, mu, mu1)[1]


def filter_value(spec: FilterSpec, mu: float, mu1: float) -> float:
    """q(alpha, mu) for a single singular value."""
    return float(filter_values(spec, mu, mu1)[0])


# --- condition checks ------------------------------------------------------


@dataclass(frozen=True)
class FilterConditionReport:
    """Grid-based evaluation of the filter (A1-A3) and order (B1-B2) conditions."""
    alphas: np.ndarray
    c_alpha: np.ndarray
    q_bound: float
    limit_check: bool
    gamma_fit: Optional[float]
    sigma: Optional[float] = None
    qualification_sup: Optional[np.ndarray] = None
    qualification_exponent: Optional[float] = None

    def satisfies_filter_conditions(self, q_max: float = 1.0) -> bool:
        return bool(
            np.all(np.isfinite(self.c_alpha))
            and self.q_bound <= q_max + CONDITION_SLACK
            and self.limit_check
        )


def mu_grid(mu1: float, alpha_grid: Iterable[float], size: int = 200,
            lower: Optional[float] = None) -> np.ndarray:
    """Log-spaced grid on (0, mu1] with the points sqrt(alpha) inserted."""
    lower = mu1 * 1e-4 if lower is None else lower
    points = np.geomspace(lower, mu1, size)
    extremal = np.sqrt(np.asarray(list(alpha_grid), dtype=np.float64))
    extremal = extremal[(extremal > 0) & (extremal <= mu1)]
    return np.unique(np.concatenate([points, extremal, [mu1]]))


def _grids(mu_grid_values: Sequence[float], alpha_grid: Sequence[float], mu1: Optional[float]):
    mus = np.asarray(mu_grid_values, dtype=np.float64)
    alphas = np.asarray(alpha_grid, dtype=np.float64)
    if mus.size == 0 or alphas.size == 0:
        raise InvalidInputError("mu and alpha grids must be non-empty")
    if np.any(alphas <= 0):
        raise InvalidInputError("alpha grid values must be > 0")
    mu1 = float(np.max(mus)) if mu1 is None else float(mu1)
    _check_mu(mus, mu1)
    return mus, alphas, mu1


def _loglog_slope(x: np.ndarray, y: np.ndarray) -> Optional[float]:
    """Unweighted least-squares slope of log y against log x."""
    usable = (x > 0) & (y > 0) & np.isfinite(y)
    if np.count_nonzero(usable) < 2:
        return None
    slope, _ = np.polyfit(np.log(x[usable]), np.log(y[usable]), 1)
    return float(slope)


def check_filter_conditions(spec: FilterSpec, mu_grid_values: Sequence[float],
                            alpha_grid: Sequence[float],
                            mu1: Optional[float] = None) -> FilterConditionReport:
    """Evaluate c(alpha) = sup |q/mu|, sup |q| and the alpha -> 0 limit on grids."""
    mus, alphas, mu1 = _grids(mu_grid_values, alpha_grid, mu1)

    c_alpha = np.empty(alphas.size)
    q_bound = 0.0
    for i, alpha in enumerate(alphas):
        q = filter_values(spec.with_alpha(alpha), mus, mu1)
        c_alpha[i] = np.max(np.abs(q / mus))
        q_bound = max(q_bound, float(np.max(np.abs(q))))

    q_limit = filter_values(spec.with_alpha(LIMIT_ALPHA), mus, mu1)
    limit_check = bool(np.all(q_limit > 1.0 - LIMIT_TOL))
    gamma_fit = _loglog_slope(1.0 / alphas, c_alpha)

    logger.debug(
        f"{spec.describe()}: q_bound={q_bound:.6g}, limit_check={limit_check}, "
        f"gamma_fit={gamma_fit}"
    )
    return FilterConditionReport(
        alphas=alphas, c_alpha=c_alpha, q_bound=q_bound,
        limit_check=limit_check, gamma_fit=gamma_fit,
    )


def check_order_conditions(spec: FilterSpec, sigma: float, mu_grid_values: Sequence[float],
                           alpha_grid: Sequence[float],
                           mu1: Optional[float] = None) -> FilterConditionReport:
    """Filter conditions plus sup (1 - q) mu^sigma per alpha and its fitted alpha exponent."""
    if not sigma > 0:
        raise InvalidParameterError(f"sigma must be > 0, got {sigma}")
    report = check_filter_conditions(spec, mu_grid_values, alpha_grid, mu1)
    mus, alphas, mu1 = _grids(mu_grid_values, alpha_grid, mu1)

    qualification = np.empty(alphas.size)
    for i, alpha in enumerate(alphas):
        s = residual_values(spec.with_alpha(alpha), mus, mu1)
        qualification[i] = np.max(np.abs(s) * mus**sigma)

    return replace(
        report,
        sigma=float(sigma),
        qualification_sup=qualification,
        qualification_exponent=_loglog_slope(alphas, qualification),
    )


# --- sandwich inequality ---------------------------------------------------


def sandwich_ratio(x, r: float):
    """f(x) = ((x+1)^r - x^r) / (x+1)^(r-1); monotone with f(0) = 1 and f -> r."""
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore"):
        return (x + 1.0) * -np.expm1(r * np.log1p(-1.0 / (x + 1.0)))


def sandwich_check(l: int, r: float, alpha: float, mu: float, mu1: float) -> bool:
    """min(1,r)(1 - q_l) <= 1 - q_l^r <= max(1,r)(1 - q_l) within 1e-12."""
    weighted = residual_values(FilterSpec.weighted_ii(alpha, l), mu, mu1)
    fractional = residual_values(FilterSpec.fractional_weighted(alpha, l, r), mu, mu1)
    lower = min(1.0, r) * weighted - CONDITION_SLACK
    upper = max(1.0, r) * weighted + CONDITION_SLACK
    return bool(np.all((lower <= fractional) & (fractional <= upper)))



def verify_regularizing_filter(spec: FilterSpec, mu1: float = 1.0,
                               alpha_grid: Optional[Sequence[float]] = None) -> bool:
    """True when the grid checks find c(alpha) finite, |q| <= 1 and q -> 1 as alpha -> 0."""
    alphas = np.logspace(-1, -8, 8) if alpha_grid is None else np.asarray(alpha_grid)
    report = check_filter_conditions(spec, mu_grid(mu1, alphas), alphas, mu1)
    return report.satisfies_filter_conditions()
