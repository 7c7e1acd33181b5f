"""Discretized first-kind Fredholm test problems and the noise model."""

import json
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import eval_laguerre

from .errors import InvalidInputError
from .linalg import as_matrix, as_vector, sym_eig

logger = logging.getLogger(__name__)

MAX_POINTS = 64


@dataclass(frozen=True)
class DiscreteProblem:
    """Collocation system A x = y with exact data.

    ``x_exact`` and ``y_exact`` live in scaled coordinates; function values
    at the nodes are ``x_exact / scaling``.
    """
    kind: str
    n: int
    A: np.ndarray
    y_exact: np.ndarray
    x_exact: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    scaling: np.ndarray
    quadrature_residual: float

    @property
    def x_function(self) -> np.ndarray:
        return self.x_exact / self.scaling

    def scaled_error(self, x: np.ndarray) -> float:
        """l2 error in scaled coordinates; the default metric for all experiments."""
        return float(np.linalg.norm(np.asarray(x) - self.x_exact))


@dataclass(frozen=True)
class NoisySample:
    y_delta: np.ndarray
    delta: float
    seed: Optional[int]


def _build(kind: str, n: int, A: np.ndarray, y: np.ndarray, x: np.ndarray, nodes: np.ndarray,
           weights: np.ndarray, scaling: np.ndarray) -> DiscreteProblem:
    residual = float(np.linalg.norm(A @ x - y))
    logger.debug(f"{kind} problem n={n}: quadrature residual {residual:.3e}")
    return DiscreteProblem(kind=kind, n=n, A=A, y_exact=y, x_exact=x, nodes=nodes,
                           weights=weights, scaling=scaling, quadrature_residual=residual)


def gauss_laguerre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point Gauss-Laguerre rule for weight e^{-t} on [0, inf).

    Nodes are eigenvalues of the symmetric Jacobi matrix (diagonal 2k+1,
    off-diagonal k), polished by one Newton step on L_n; weights come from
    t / ((n+1)^2 L_{n+1}(t)^2) and are normalized to the zeroth moment 1.
    """
    if not 1 <= n <= MAX_POINTS:
        raise InvalidInputError(f"Gauss-Laguerre point count must be in [1, {MAX_POINTS}], got {n}")

    k = np.arange(n, dtype=np.float64)
    jacobi = np.diag(2.0 * k + 1.0) + np.diag(k[1:], 1) + np.diag(k[1:], -1)
    nodes = np.sort(sym_eig(jacobi).eigenvalues)

    # L_n'(t) = n (L_n(t) - L_{n-1}(t)) / t
    value = eval_laguerre(n, nodes)
    derivative = n * (value - eval_laguerre(n - 1, nodes)) / nodes
    nodes = nodes - value / derivative

    weights = nodes / ((n + 1) ** 2 * eval_laguerre(n + 1, nodes) ** 2)
    total = weights.sum()
    if abs(total - 1.0) > 1e-8:
        logger.warning(f"Gauss-Laguerre n={n}: raw weights sum to {total!r}")
    return nodes, weights / total


def laplace_problem(n: int) -> DiscreteProblem:
    """int_0^inf e^{-st} x(t) dt = 2/(2s+1), exact solution e^{-t/2}.

    Collocation at the Gauss-Laguerre nodes, symmetrized with
    D^{1/2} K D^{1/2}, D = diag(w_j e^{t_j}), K_ij = e^{-t_i t_j}.
    """
    nodes, weights = gauss_laguerre(n)
    scaling = np.sqrt(np.exp(np.log(weights) + nodes))
    A = np.exp(-np.outer(nodes, nodes)) * np.outer(scaling, scaling)
    x = scaling * np.exp(-nodes / 2.0)
    y = scaling * 2.0 / (2.0 * nodes + 1.0)
    return _build("laplace", n, A, y, x, nodes, weights, scaling)


def simpson_weights(n: int) -> np.ndarray:
    """Composite Simpson weights h/3 [1, 4, 2, ..., 2, 4, 1] on [0, 1], h = 1/n."""
    weights = np.full(n + 1, 2.0)
    weights[1::2] = 4.0
    weights[0] = weights[-1] = 1.0
    return weights / (3.0 * n)


def simpson_problem(n: int) -> DiscreteProblem:
    """int_0^1 (1+ts) e^{ts} x(s) ds = e^t with x = 1, collocated at t = j/n."""
    if n % 2 or not 4 <= n <= MAX_POINTS:
        raise InvalidInputError(
            f"Simpson subinterval count must be even in [4, {MAX_POINTS}], got {n}"
        )
    nodes = np.arange(n + 1, dtype=np.float64) / n
    weights = simpson_weights(n)
    ts = np.outer(nodes, nodes)
    A = (1.0 + ts) * np.exp(ts) * weights[np.newaxis, :]
    return _build("simpson", n, A, np.exp(nodes), np.ones(n + 1), nodes, weights,
                  np.ones(n + 1))


def synthetic_diagonal_problem(mu, x_exact=None) -> DiscreteProblem:
    """Diagonal operator diag(mu) with consistent data y = A x."""
    mu = np.asarray(mu, dtype=np.float64)
    if mu.ndim != 1 or mu.size == 0 or np.any(mu <= 0):
        raise InvalidInputError("Diagonal entries must be a non-empty positive vector")
    n = mu.size
    x = np.ones(n) if x_exact is None else as_vector(x_exact, n, "x_exact")
    A = np.diag(mu)
    return _build("synthetic", n, A, A @ x, x, np.arange(1.0, n + 1.0), np.ones(n), np.ones(n))


def with_exact_solution(problem: DiscreteProblem, x: np.ndarray) -> DiscreteProblem:
    """Same operator with x replaced and consistent data y = A x."""
    x = as_vector(x, problem.A.shape[1], "x")
    return _build(problem.kind, problem.n, problem.A, problem.A @ x, x, problem.nodes,
                  problem.weights, problem.scaling)


def make_problem(kind: str, n: int) -> DiscreteProblem:
    if kind == "laplace":
        return laplace_problem(n)
    if kind == "simpson":
        return simpson_problem(n)
    if kind == "synthetic":
        # spectrum from 1 down to 1e-4, x_exact = 1
        return synthetic_diagonal_problem(np.logspace(0.0, -4.0, n))
    raise InvalidInputError(f"Unknown problem kind: {kind}")


def add_noise(y, delta: float, seed: Optional[int] = None) -> NoisySample:
    """y + delta * eta / ||eta|| with eta standard normal, so ||y_delta - y|| = delta."""
    y = np.asarray(y, dtype=np.float64)
    if not delta >= 0:
        raise InvalidInputError(f"Noise level must be >= 0, got {delta}")
    if delta == 0:
        return NoisySample(y_delta=y.copy(), delta=0.0, seed=seed)
    rng = np.random.default_rng(seed)
    eta = rng.standard_normal(y.shape)
    return NoisySample(y_delta=y + delta * eta / np.linalg.norm(eta), delta=float(delta),
                       seed=seed)


def function_error(problem: DiscreteProblem, x, weighted: bool = False) -> float:
    """Error in function values at the nodes.

    With ``weighted`` the error is measured in the quadrature approximation of
    the L2 norm of the underlying function space instead of node-wise l2.
    """
    error = np.asarray(x) / problem.scaling - problem.x_function
    if not weighted:
        return float(np.linalg.norm(error))
    # Laplace: sum w_j e^{t_j} e_j^2 integrates over [0, inf) without the weight
    measure = problem.scaling**2 if problem.kind == "laplace" else problem.weights
    return float(np.sqrt(np.sum(measure * error**2)))


# --- JSON document ---------------------------------------------------------


def problem_to_json(problem: DiscreteProblem) -> str:
    document = {
        "n": problem.n,
        "kind": problem.kind,
        "matrix": problem.A.tolist(),
        "nodes": problem.nodes.tolist(),
        "weights": problem.weights.tolist(),
        "x_exact": problem.x_exact.tolist(),
        "y_exact": problem.y_exact.tolist(),
        "scaling": problem.scaling.tolist(),
    }
    return json.dumps(document)


def problem_from_json(text: str) -> DiscreteProblem:
    try:
        document = json.loads(text)
        A = as_matrix(document["matrix"])
        size = A.shape[1]
        return _build(
            document["kind"], int(document["n"]), A,
            as_vector(document["y_exact"], A.shape[0], "y_exact"),
            as_vector(document["x_exact"], size, "x_exact"),
            as_vector(document["nodes"], size, "nodes"),
            as_vector(document["weights"], size, "weights"),
            as_vector(document["scaling"], size, "scaling"),
        )
    except (KeyError, TypeError, json.JSONDecodeError) as e:
        raise InvalidInputError(f"Malformed problem document: {e}") from e
