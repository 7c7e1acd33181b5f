import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose

from iterreg.errors import (DecompositionError, InvalidInputError, NotPSDError,
                            SingularMatrixError)
from iterreg.linalg import (as_matrix, as_symmetric, clamped_eigenvalues, condition_number,
                            singular_system, solve_general, solve_spd, spd_solver, sym_eig,
                            sym_matrix_power)


def test_sym_eig_descending_and_orthonormal(make_psd):
    S = make_psd(7)
    eig = sym_eig(S)
    V = eig.eigenvectors
    assert np.all(np.diff(eig.eigenvalues) <= 0)
    assert_allclose(V.T @ V, np.eye(7), atol=1e-10)
    assert_allclose(S @ V, V * eig.eigenvalues, atol=1e-10 * np.max(np.abs(eig.eigenvalues)))
    assert_allclose(eig.reconstruct(), S, atol=1e-12)


def test_jacobi_agrees_with_lapack(rng):
    M = rng.standard_normal((6, 6))
    S = M + M.T
    lapack = sym_eig(S)
    jacobi = sym_eig(S, method="jacobi")
    scale = np.max(np.abs(lapack.eigenvalues))
    assert_allclose(jacobi.eigenvalues, lapack.eigenvalues, atol=1e-10 * scale)
    assert_allclose(jacobi.eigenvectors.T @ jacobi.eigenvectors, np.eye(6), atol=1e-10)
    assert_allclose(jacobi.reconstruct(), S, atol=1e-10 * scale)


def test_jacobi_on_diagonal_matrix():
    eig = sym_eig(np.diag([1.0, 3.0, 2.0]), method="jacobi")
    assert_allclose(eig.eigenvalues, [3.0, 2.0, 1.0])


def test_jacobi_subnormal_off_diagonal():
    S = np.array([[1.0, 1e-320, 0.5], [1e-320, 2.0, 0.0], [0.5, 0.0, 3.0]])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        eig = sym_eig(S, method="jacobi")
    assert np.all(np.isfinite(eig.eigenvectors))
    assert_allclose(eig.eigenvalues, sym_eig(S).eigenvalues, atol=1e-12)


def test_sym_eig_rejects_nonsymmetric():
    with pytest.raises(InvalidInputError):
        sym_eig([[1.0, 2.0], [0.0, 1.0]])


def test_sym_eig_rejects_unknown_method():
    with pytest.raises(InvalidInputError):
        sym_eig(np.eye(2), method="qr")


def test_as_symmetric_returns_symmetric_part():
    S = as_symmetric([[1.0, 2.0], [2.0 + 1e-15, 1.0]])
    assert np.array_equal(S, S.T)


def test_as_matrix_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        as_matrix([1.0, 2.0])
    with pytest.raises(InvalidInputError):
        as_matrix([[1.0, np.nan]])


def test_matrix_square_root(make_psd):
    S = make_psd(5)
    root = sym_matrix_power(S, 0.5)
    assert_allclose(root @ root, S, atol=1e-12)
    assert_allclose(sym_matrix_power(S, 1.0), S, atol=1e-12)
    assert_allclose(sym_matrix_power(S, 0.0), np.eye(5), atol=1e-12)


def test_matrix_power_clamps_roundoff_negatives():
    power = sym_matrix_power(np.diag([1.0, -1e-14]), 0.5)
    assert_allclose(power, np.diag([1.0, 0.0]), atol=1e-15)


def test_matrix_power_rejects_indefinite():
    with pytest.raises(NotPSDError):
        sym_matrix_power(np.diag([1.0, -1.0]), 0.5)
    with pytest.raises(NotPSDError):
        clamped_eigenvalues(sym_eig(np.diag([2.0, -0.1])))


def test_matrix_power_rejects_negative_exponent():
    with pytest.raises(InvalidInputError):
        sym_matrix_power(np.eye(2), -1.0)


def test_singular_system_invariants(rng):
    A = rng.standard_normal((7, 5))
    sys = singular_system(A)
    assert sys.shape == (7, 5)
    assert np.all(np.diff(sys.mu) <= 0) and np.all(sys.mu >= 0)
    assert_allclose(A @ sys.right_vectors, sys.left_vectors * sys.mu, atol=1e-10 * sys.mu1)
    assert_allclose(sys.left_vectors.T @ sys.left_vectors, np.eye(5), atol=1e-10)
    assert_allclose(sys.right_vectors.T @ sys.right_vectors, np.eye(5), atol=1e-10)
    assert_allclose(sys.reconstruct(), A, atol=1e-12)


def test_numerical_rank():
    assert singular_system(np.diag([1.0, 1e-20])).numerical_rank() == 1
    assert singular_system(np.zeros((2, 2))).numerical_rank() == 0


def test_spd_solver_reuses_factorization(make_psd, rng):
    S = make_psd(6)
    solve = spd_solver(S)
    for _ in range(3):
        b = rng.standard_normal(6)
        assert_allclose(S @ solve(b), b, atol=1e-10)
    assert_allclose(S @ solve_spd(S, b), b, atol=1e-10)


def test_spd_solver_rejects_indefinite():
    with pytest.raises(DecompositionError):
        spd_solver(np.diag([1.0, -1.0]))


def test_solve_general(rng):
    A = rng.standard_normal((5, 5)) + 5 * np.eye(5)
    b = rng.standard_normal(5)
    assert_allclose(A @ solve_general(A, b), b, atol=1e-10)


def test_solve_general_exact_zero_pivot():
    with pytest.raises(SingularMatrixError):
        solve_general(np.zeros((2, 2)), [1.0, 1.0])


def test_solve_general_dimension_mismatch():
    with pytest.raises(InvalidInputError):
        solve_general(np.eye(3), [1.0, 2.0])


def test_condition_number():
    assert condition_number(np.diag([2.0, 1.0])) == pytest.approx(2.0)
    assert condition_number(np.diag([1.0, 0.0])) == float("inf")
    with pytest.raises(InvalidInputError):
        condition_number(np.zeros((3, 3)))
