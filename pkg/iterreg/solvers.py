"""Regularized solutions: spectral filtering and the three iterative schemes.

The iterative methods all start from x^0 = 0 and have a spectral filter
form, so every iterate can be cross-checked against ``apply_filter_solver``.
"""

import logging
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .filters import FilterSpec, filter_values
from .linalg import (RANK_RTOL, SingularSystem, as_matrix, as_vector, singular_system,
                     spd_solver, sym_matrix_power)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RegularizedSolution:
    x: np.ndarray
    residual_norm: float
    solution_norm: float
    spec: FilterSpec
    alpha_used: float


@dataclass(frozen=True)
class SourceElement:
    """x = (A^T A)^(sigma/2) z with ||z|| <= E."""
    x: np.ndarray
    z: np.ndarray
    sigma: float
    E: float


def _solution(A: np.ndarray, y: np.ndarray, x: np.ndarray, spec: FilterSpec) -> RegularizedSolution:
    return RegularizedSolution(
        x=x,
        residual_norm=float(np.linalg.norm(A @ x - y)),
        solution_norm=float(np.linalg.norm(x)),
        spec=spec,
        alpha_used=float(spec.effective_alpha),
    )


def _system_and_data(A, y):
    M = as_matrix(A)
    return M, as_vector(y, M.shape[0], "y")


def apply_filter_solver(sys: SingularSystem, y, spec: FilterSpec) -> RegularizedSolution:
    """x = sum_j q(alpha, mu_j)/mu_j (y, u_j) v_j over the numerically nonzero mu_j."""
    rows, _ = sys.shape
    y = as_vector(y, rows, "y")
    keep = sys.mu > RANK_RTOL * sys.mu1
    skipped = sys.mu.size - int(np.count_nonzero(keep))
    if skipped:
        logger.debug(f"Skipping {skipped} singular values below {RANK_RTOL:g}*mu1")

    mu = sys.mu[keep]
    coefficients = sys.left_vectors[:, keep].T @ y
    q = filter_values(spec, mu, sys.mu1)
    x = sys.right_vectors[:, keep] @ (q / mu * coefficients)
    return _solution(sys.reconstruct(), y, x, spec)


# --- iterated Tikhonov -----------------------------------------------------


def _check_alpha_m(alpha: float, m: int):
    # FilterSpec carries the validation rules for alpha and m
    return FilterSpec.iterated_tikhonov(alpha, m)


def iterate_iterated_tikhonov(A, y, alpha: float, m: int) -> Iterator[np.ndarray]:
    """Yield x^1..x^m of (alpha I + A^T A) x^{k+1} = A^T y + alpha x^k."""
    _check_alpha_m(alpha, m)
    A, y = _system_and_data(A, y)
    solve = spd_solver(alpha * np.eye(A.shape[1]) + A.T @ A)
    rhs = A.T @ y
    x = np.zeros(A.shape[1])
    for _ in range(m):
        x = solve(rhs + alpha * x)
        yield x


def iterated_tikhonov(A, y, alpha: float, m: int) -> RegularizedSolution:
    spec = _check_alpha_m(alpha, m)
    x = None
    for x in iterate_iterated_tikhonov(A, y, alpha, m):
        pass
    M, y = _system_and_data(A, y)
    return _solution(M, y, x, spec)


# --- Landweber -------------------------------------------------------------


def landweber_step_limit(A) -> float:
    """Supremum 2 / mu1^2 of admissible Landweber step sizes."""
    return 2.0 / singular_system(A).mu1 ** 2


def iterate_landweber(A, y, a: float, m: int) -> Iterator[np.ndarray]:
    """Yield x^1..x^m of x^k = (I - a A^T A) x^{k-1} + a A^T y."""
    FilterSpec.landweber(a, m)
    A, y = _system_and_data(A, y)
    limit = landweber_step_limit(A)
    if a >= limit:
        raise InvalidParameterError(
            f"Landweber step a={a:g} violates a*mu1^2 < 2 (limit {limit:.6g})"
        )
    x = np.zeros(A.shape[1])
    for _ in range(m):
        x = x + a * (A.T @ (y - A @ x))
        yield x


def landweber(A, y, a: float, m: int) -> RegularizedSolution:
    x = None
    for x in iterate_landweber(A, y, a, m):
        pass
    M, y = _system_and_data(A, y)
    return _solution(M, y, x, FilterSpec.landweber(a, m))


# --- iterated fractional weighted Tikhonov ---------------------------------


@dataclass(frozen=True)
class _NewIterationOperators:
    solve: object
    correction: np.ndarray
    rhs: np.ndarray


def _new_iteration_operators(A: np.ndarray, y: np.ndarray, alpha: float, l: int,
                             r: float) -> _NewIterationOperators:
    """C = (G + alpha (I - G/||G||)^l)^r, C - G^r and G^(r-1) A^T y for G = A^T A."""
    sys = singular_system(A)
    if sys.mu1 == 0.0:
        raise InvalidInputError("Operator is identically zero")
    n = A.shape[1]
    gram = A.T @ A
    gram = 0.5 * (gram + gram.T)
    gram_norm = sys.mu1 ** 2

    weight = sym_matrix_power(np.eye(n) - gram / gram_norm, l)
    C = sym_matrix_power(gram + alpha * weight, r)
    correction = C - sym_matrix_power(gram, r)

    # G^(r-1) A^T y = V diag(mu^(2r-1)) U^T y, finite for r >= 1/2
    keep = sys.mu > RANK_RTOL * sys.mu1
    powers = sys.mu[keep] ** (2.0 * r - 1.0)
    rhs = sys.right_vectors[:, keep] @ (powers * (sys.left_vectors[:, keep].T @ y))

    logger.debug(f"New iteration operators built: n={n}, alpha={alpha:g}, l={l}, r={r:g}")
    return _NewIterationOperators(solve=spd_solver(C), correction=correction, rhs=rhs)


def iterate_new_iterated_tikhonov(A, y, alpha: float, l: int, r: float,
                                  m: int) -> Iterator[np.ndarray]:
    """Yield x^1..x^m of C x^k = G^(r-1) A^T y + (C - G^r) x^{k-1}."""
    FilterSpec.iterated_fractional_weighted(alpha, l, r, m)
    A, y = _system_and_data(A, y)
    ops = _new_iteration_operators(A, y, alpha, l, r)
    x = np.zeros(A.shape[1])
    for _ in range(m):
        x = ops.solve(ops.rhs + ops.correction @ x)
        yield x


def new_iterated_tikhonov(A, y, alpha: float, l: int, r: float, m: int) -> RegularizedSolution:
    spec = FilterSpec.iterated_fractional_weighted(alpha, l, r, m)
    x = None
    for x in iterate_new_iterated_tikhonov(A, y, alpha, l, r, m):
        pass
    M, y = _system_and_data(A, y)
    return _solution(M, y, x, spec)


def new_iterated_tikhonov_cholesky(A, y, alpha: float, l: int, m: int) -> RegularizedSolution:
    """The r = 1 case without any eigendecomposition.

    (G + alpha W^l) x^k = A^T y + alpha W^l x^{k-1}, W = I - G/||G||, one
    Cholesky factorization reused for every step.
    """
    spec = FilterSpec.iterated_fractional_weighted(alpha, l, 1.0, m)
    A, y = _system_and_data(A, y)
    gram = A.T @ A
    gram_norm = np.linalg.norm(A, 2) ** 2
    penalty = alpha * np.linalg.matrix_power(np.eye(A.shape[1]) - gram / gram_norm, l)
    solve = spd_solver(gram + penalty)
    rhs = A.T @ y
    x = np.zeros(A.shape[1])
    for _ in range(m):
        x = solve(rhs + penalty @ x)
    return _solution(A, y, x, spec)


# --- parameter choice ------------------------------------------------------


def _require_positive(**values):
    bad = [f"{name}={value}" for name, value in values.items() if not value > 0]
    if bad:
        raise InvalidParameterError(f"Parameters must be > 0: {', '.join(bad)}")


def apriori_alpha(delta: float, E: float, sigma: float, m: int = 1) -> float:
    """alpha = (delta/E)^(2m/(1+sigma)); for m = 1 the fractional weighted rule."""
    _require_positive(delta=delta, E=E)
    if not (isinstance(m, (int, np.integer)) and not isinstance(m, bool) and m >= 1):
        raise InvalidParameterError(f"m must be an integer >= 1, got {m!r}")
    if sigma < 0:
        raise InvalidParameterError(f"sigma must be >= 0, got {sigma}")
    return float((delta / E) ** (2.0 * m / (1.0 + sigma)))


def general_alpha(delta: float, E: float, gamma: float, sigma: float, c: float,
                  c_sigma: float) -> float:
    """alpha = c_hat (delta/E)^(1/(gamma(sigma+1))).

    c_hat = (c/(sigma c_sigma))^(1/(gamma(sigma+1))).
    """
    _require_positive(delta=delta, E=E, gamma=gamma, sigma=sigma, c=c, c_sigma=c_sigma)
    exponent = 1.0 / (gamma * (sigma + 1.0))
    c_hat = (c / (sigma * c_sigma)) ** exponent
    return float(c_hat * (delta / E) ** exponent)


def order_optimal_alpha(delta: float, E: float, sigma: float) -> float:
    """general_alpha with gamma = 1/2 and c_hat = 1: (delta/E)^(2/(sigma+1))."""
    _require_positive(delta=delta, E=E)
    if sigma < 0:
        raise InvalidParameterError(f"sigma must be >= 0, got {sigma}")
    return float((delta / E) ** (2.0 / (sigma + 1.0)))


def worst_case_bound(delta: float, E: float, sigma: float) -> float:
    """delta^(sigma/(sigma+1)) E^(1/(sigma+1))."""
    _require_positive(delta=delta, E=E)
    return float(delta ** (sigma / (sigma + 1.0)) * E ** (1.0 / (sigma + 1.0)))


# --- source elements -------------------------------------------------------


def source_element_from(sys: SingularSystem, z, sigma: float) -> SourceElement:
    """x = sum_j mu_j^sigma (z, v_j) v_j for a given preimage z."""
    if sigma < 0:
        raise InvalidParameterError(f"sigma must be >= 0, got {sigma}")
    z = as_vector(z, sys.right_vectors.shape[0], "z")
    V = sys.right_vectors
    x = V @ (sys.mu**sigma * (V.T @ z))
    if V.shape[1] < V.shape[0] and sigma == 0:
        # thin V does not span the whole space; the identity power keeps z
        x = z.copy()
    return SourceElement(x=x, z=z, sigma=float(sigma), E=float(np.linalg.norm(z)))


def make_source_element(sys: SingularSystem, sigma: float, E: float,
                        seed: Optional[int] = None) -> SourceElement:
    """Random element of X_{sigma,E}: z standard normal rescaled to ||z|| = E."""
    _require_positive(E=E)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(sys.right_vectors.shape[0])
    z *= E / np.linalg.norm(z)
    element = source_element_from(sys, z, sigma)
    return SourceElement(x=element.x, z=element.z, sigma=element.sigma, E=float(E))
