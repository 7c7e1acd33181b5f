"""Dense real linear algebra used by the filters, solvers and problems."""

import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
import scipy.linalg as sla

from .errors import DecompositionError, InvalidInputError, NotPSDError, SingularMatrixError

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, Sequence[float], Sequence[Sequence[float]]]

SYMMETRY_RTOL = 1e-12
PSD_CLAMP_RTOL = 1e-12
RANK_RTOL = 1e-14
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100


@dataclass(frozen=True)
class SymEig:
    """Eigendecomposition of a symmetric matrix, eigenvalues in descending order."""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return spectral_function(self, self.eigenvalues)


@dataclass(frozen=True)
class SingularSystem:
    """Singular values (descending) with left and right singular vectors as columns.

    ``A @ right_vectors[:, j] == mu[j] * left_vectors[:, j]`` for every j.
    """
    mu: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray

    @property
    def mu1(self) -> float:
        return float(self.mu[0])

    @property
    def shape(self):
        return self.left_vectors.shape[0], self.right_vectors.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.left_vectors * self.mu) @ self.right_vectors.T

    def numerical_rank(self, rtol: float = RANK_RTOL) -> int:
        """Number of singular values above ``rtol * mu1``."""
        if self.mu1 == 0.0:
            return 0
        return int(np.count_nonzero(self.mu > rtol * self.mu1))


def as_matrix(A: ArrayLike) -> np.ndarray:
    """Validate and convert to a 2-D float64 array with finite entries."""
    M = np.asarray(A, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise InvalidInputError(f"Expected a non-empty 2-D matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError("Matrix has non-finite entries")
    return M


def as_vector(b: ArrayLike, length: int, name: str = "vector") -> np.ndarray:
    v = np.asarray(b, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != length:
        raise InvalidInputError(f"{name} must have length {length}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return v


def as_symmetric(S: ArrayLike) -> np.ndarray:
    """Check symmetry within ``SYMMETRY_RTOL`` relative and return the symmetric part."""
    M = as_matrix(S)
    if M.shape[0] != M.shape[1]:
        raise InvalidInputError(f"Matrix must be square, got shape {M.shape}")
    scale = np.max(np.abs(M))
    if scale > 0 and np.max(np.abs(M - M.T)) > SYMMETRY_RTOL * scale:
        raise InvalidInputError("Matrix is not symmetric")
    return 0.5 * (M + M.T)


def _jacobi_eig(S: np.ndarray):
    """Cyclic Jacobi rotations until the off-diagonal Frobenius norm is negligible."""
    A = S.copy()
    n = A.shape[0]
    V = np.eye(n)
    target = JACOBI_TOL * np.linalg.norm(S)

    for sweep in range(JACOBI_MAX_SWEEPS):
        off = np.sqrt(max(np.sum(A * A) - np.sum(np.diag(A) ** 2), 0.0))
        if off <= target:
            logger.debug(f"Jacobi converged after {sweep} sweeps (off={off:.3e})")
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                diff = A[q, q] - A[p, p]
                if diff == 0.0:
                    t = 1.0
                elif abs(diff) > 1e150 * abs(2.0 * apq):
                    # |theta| too large to square; t ~ 1/(2 theta)
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0

                vec_p = V[:, p].copy()
                vec_q = V[:, q].copy()
                V[:, p] = c * vec_p - s * vec_q
                V[:, q] = s * vec_p + c * vec_q
    else:
        logger.warning(f"Jacobi eigensolver hit the {JACOBI_MAX_SWEEPS} sweep cap")

    return np.diag(A).copy(), V


def sym_eig(S: ArrayLike, method: str = "lapack") -> SymEig:
    """Eigendecomposition of a symmetric matrix.

    ``method="lapack"`` uses ``numpy.linalg.eigh``; ``method="jacobi"`` runs
    cyclic Jacobi rotations (accurate for the small dense matrices used here).
    """
    M = as_symmetric(S)
    if method == "lapack":
        values, vectors = np.linalg.eigh(M)
    elif method == "jacobi":
        values, vectors = _jacobi_eig(M)
    else:
        raise InvalidInputError(f"Unknown eigensolver method: {method}")

    order = np.argsort(values)[::-1]
    return SymEig(eigenvalues=values[order], eigenvectors=vectors[:, order])


def spectral_function(eig: SymEig, values: ArrayLike) -> np.ndarray:
    """Return ``V @ diag(values) @ V.T`` for the eigenvectors of ``eig``."""
    V = eig.eigenvectors
    d = np.asarray(values, dtype=np.float64)
    M = (V * d) @ V.T
    return 0.5 * (M + M.T)


def clamped_eigenvalues(eig: SymEig) -> np.ndarray:
    """Eigenvalues with roundoff negatives set to zero; raises if any is truly negative."""
    lam = eig.eigenvalues
    scale = np.max(np.abs(lam)) if lam.size else 0.0
    if lam.size and lam[-1] < -PSD_CLAMP_RTOL * scale:
        raise NotPSDError(
            f"Matrix is not positive semidefinite: eigenvalue {lam[-1]:.3e} "
            f"below -{PSD_CLAMP_RTOL:g}*{scale:.3e}"
        )
    return np.maximum(lam, 0.0)


def sym_matrix_power(S: ArrayLike, r: float) -> np.ndarray:
    """``S**r`` for symmetric positive-semidefinite ``S`` via its eigendecomposition."""
    if r < 0:
        raise InvalidInputError(f"Power must be non-negative, got {r}")
    eig = sym_eig(S)
    lam = clamped_eigenvalues(eig)
    return spectral_function(eig, np.power(lam, r))


def singular_system(A: ArrayLike) -> SingularSystem:
    """Thin SVD of ``A``."""
    M = as_matrix(A)
    U, mu, Vt = np.linalg.svd(M, full_matrices=False)
    return SingularSystem(mu=mu, left_vectors=U, right_vectors=Vt.T)


def spd_solver(S: ArrayLike) -> Callable[[np.ndarray], np.ndarray]:
    """Cholesky-factor ``S`` once and return a solve function for repeated right-hand sides."""
    M = as_symmetric(S)
    try:
        factor = sla.cho_factor(M, lower=True)
    except np.linalg.LinAlgError as e:
        raise DecompositionError(f"Cholesky factorization failed: {e}") from e

    def solve(b: np.ndarray) -> np.ndarray:
        return sla.cho_solve(factor, as_vector(b, M.shape[0], "right-hand side"))

    return solve


def solve_spd(S: ArrayLike, b: ArrayLike) -> np.ndarray:
    """Solve ``S x = b`` for symmetric positive-definite ``S``."""
    return spd_solver(S)(np.asarray(b, dtype=np.float64))


def solve_general(A: ArrayLike, b: ArrayLike) -> np.ndarray:
    """Gaussian elimination with partial pivoting.

    Numerically singular systems still return whatever the elimination
    produces; only an exact zero pivot is an error.
    """
    M = as_matrix(A)
    if M.shape[0] != M.shape[1]:
        raise InvalidInputError(f"Matrix must be square, got shape {M.shape}")
    rhs = as_vector(b, M.shape[0], "right-hand side")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(M)
    zero_pivots = np.flatnonzero(np.diag(lu) == 0.0)
    if zero_pivots.size:
        raise SingularMatrixError(f"Exact zero pivot at position {zero_pivots[0]}")
    return sla.lu_solve((lu, piv), rhs)


def condition_number(A: ArrayLike) -> float:
    """Spectral condition number ``mu_1 / mu_min``; ``inf`` when ``mu_min`` underflows."""
    system = singular_system(A)
    if system.mu1 == 0.0:
        raise InvalidInputError("Condition number of the zero matrix is undefined")
    mu_min = float(system.mu[-1])
    if mu_min == 0.0:
        return float("inf")
    with np.errstate(over="ignore"):
        return float(system.mu1 / mu_min)
