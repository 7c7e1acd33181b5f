import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

from iterreg.errors import InvalidInputError, InvalidParameterError
from iterreg.filters import FilterSpec
from iterreg.linalg import singular_system
from iterreg.solvers import (apply_filter_solver, apriori_alpha, general_alpha,
                             iterate_iterated_tikhonov, iterate_landweber,
                             iterate_new_iterated_tikhonov, iterated_tikhonov, landweber,
                             landweber_step_limit, make_source_element, new_iterated_tikhonov,
                             new_iterated_tikhonov_cholesky, order_optimal_alpha,
                             source_element_from, worst_case_bound)


def filter_solution(A, y, spec):
    return apply_filter_solver(singular_system(A), y, spec).x


def assert_relative(actual, expected, rtol):
    assert np.linalg.norm(actual - expected) <= rtol * max(np.linalg.norm(expected), 1e-300)


def test_identity_tikhonov():
    y = np.array([1.0, 0.0, 0.0])
    solution = apply_filter_solver(singular_system(np.eye(3)), y, FilterSpec.tikhonov(1.0))
    assert_allclose(solution.x, 0.5 * y, atol=1e-15)
    assert solution.alpha_used == 1.0
    assert solution.solution_norm == pytest.approx(0.5)
    assert solution.residual_norm == pytest.approx(0.5)


def test_identity_weighted_filter_returns_data(rng):
    y = rng.standard_normal(4)
    solution = apply_filter_solver(singular_system(np.eye(4)), y, FilterSpec.weighted_ii(0.3, 2))
    assert_allclose(solution.x, y, atol=1e-14)


def test_filter_solver_dimension_mismatch():
    with pytest.raises(InvalidInputError):
        apply_filter_solver(singular_system(np.eye(3)), [1.0, 2.0], FilterSpec.tikhonov(1.0))


def test_filter_solver_skips_null_space():
    A = np.diag([1.0, 1e-20])
    x = apply_filter_solver(singular_system(A), [1.0, 1.0], FilterSpec.tikhonov(1e-30)).x
    assert np.all(np.isfinite(x))
    assert x[1] == 0.0


def test_iterated_tikhonov_identity_steps():
    e1 = np.array([1.0, 0.0])
    iterates = list(iterate_iterated_tikhonov(np.eye(2), e1, 1.0, 2))
    assert_allclose(iterates[0], 0.5 * e1, atol=1e-15)
    assert_allclose(iterates[1], 0.75 * e1, atol=1e-15)


def test_iterated_tikhonov_single_step_is_tikhonov(rng):
    A = rng.standard_normal((5, 5))
    y = rng.standard_normal(5)
    alpha = 1e-2
    expected = np.linalg.solve(alpha * np.eye(5) + A.T @ A, A.T @ y)
    assert_relative(iterated_tikhonov(A, y, alpha, 1).x, expected, 1e-10)


def test_iterated_tikhonov_matches_filter(rng):
    A = rng.standard_normal((5, 5))
    y = rng.standard_normal(5)
    x = iterated_tikhonov(A, y, 1e-2, 7).x
    assert_relative(x, filter_solution(A, y, FilterSpec.iterated_tikhonov(1e-2, 7)), 1e-9)


def test_iterated_tikhonov_residual_is_monotone(make_psd, rng):
    A = make_psd(6)
    y = A @ rng.standard_normal(6)
    residuals = [np.linalg.norm(A @ x - y) for x in iterate_iterated_tikhonov(A, y, 1e-1, 30)]
    assert np.all(np.diff(residuals) <= 1e-12)


def test_landweber_first_step(rng):
    A = rng.standard_normal((4, 4))
    y = rng.standard_normal(4)
    a = 0.5 / np.linalg.norm(A, 2) ** 2
    assert_allclose(landweber(A, y, a, 1).x, a * A.T @ y, rtol=1e-13, atol=1e-15)


def test_landweber_identity():
    x = landweber(np.eye(2), [1.0, 0.0], 0.5, 2).x
    assert_allclose(x, [0.75, 0.0], atol=1e-15)


def test_landweber_matches_filter(rng):
    A = rng.standard_normal((5, 5))
    y = rng.standard_normal(5)
    a = 0.5 / singular_system(A).mu1 ** 2
    x = landweber(A, y, a, 50).x
    assert_relative(x, filter_solution(A, y, FilterSpec.landweber(a, 50)), 1e-9)


def test_landweber_step_limit():
    A = np.diag([2.0, 1.0])
    assert landweber_step_limit(A) == pytest.approx(0.5)
    with pytest.raises(InvalidParameterError):
        landweber(A, [1.0, 1.0], 0.5, 3)
    with pytest.raises(InvalidParameterError):
        list(iterate_landweber(A, [1.0, 1.0], 0.6, 3))


def test_new_iterated_reduces_to_iterated_tikhonov(psd_matrices, rng):
    for A in psd_matrices[:5]:
        y = rng.standard_normal(A.shape[0])
        for m in (1, 4):
            assert_relative(new_iterated_tikhonov(A, y, 1e-2, 0, 1.0, m).x,
                            iterated_tikhonov(A, y, 1e-2, m).x, 1e-10)


def test_new_iterated_identity_returns_data(rng):
    y = rng.standard_normal(5)
    for x in iterate_new_iterated_tikhonov(np.eye(5), y, 1e-2, 2, 0.8, 3):
        assert_allclose(x, y, atol=1e-14)


def test_new_iterated_matches_filter(make_psd, rng):
    A = make_psd(6)
    y = rng.standard_normal(6)
    x = new_iterated_tikhonov(A, y, 1e-3, 4, 0.8, 10).x
    expected = filter_solution(A, y, FilterSpec.iterated_fractional_weighted(1e-3, 4, 0.8, 10))
    assert_relative(x, expected, 1e-9)


def test_oracle_equivalence(psd_matrices, rng):
    tuples = list(itertools.product((1e-1, 1e-2), (0, 2, 4), (0.5, 0.8, 1.0, 1.5), (1, 5, 10)))
    for A in psd_matrices:
        sys = singular_system(A)
        y = rng.standard_normal(A.shape[0])
        for alpha, l, r, m in tuples:
            spec = FilterSpec.iterated_fractional_weighted(alpha, l, r, m)
            expected = apply_filter_solver(sys, y, spec).x
            assert_relative(new_iterated_tikhonov(A, y, alpha, l, r, m).x, expected, 1e-9)


def test_apply_filter_solver_matches_iteration(make_psd, rng):
    A = make_psd(6)
    y = rng.standard_normal(6)
    spec = FilterSpec.iterated_fractional_weighted(1e-3, 2, 0.8, 5)
    solution = apply_filter_solver(singular_system(A), y, spec)
    assert_relative(solution.x, new_iterated_tikhonov(A, y, 1e-3, 2, 0.8, 5).x, 1e-9)
    assert solution.spec == spec


def test_cholesky_path_matches_spectral_path(make_psd, rng):
    A = make_psd(7)
    y = rng.standard_normal(7)
    for l in (0, 2, 4):
        assert_relative(new_iterated_tikhonov_cholesky(A, y, 1e-2, l, 6).x,
                        new_iterated_tikhonov(A, y, 1e-2, l, 1.0, 6).x, 1e-9)


def test_new_iterated_rejects_small_r(make_psd):
    with pytest.raises(InvalidParameterError):
        new_iterated_tikhonov(make_psd(3), np.ones(3), 1e-2, 2, 0.3, 2)


def test_zero_data_gives_zero_solution(make_psd):
    A = make_psd(4)
    y = np.zeros(4)
    assert not np.any(iterated_tikhonov(A, y, 1e-2, 3).x)
    assert not np.any(landweber(A, y, 0.1, 3).x)
    assert not np.any(new_iterated_tikhonov(A, y, 1e-2, 2, 0.8, 3).x)
    assert not np.any(filter_solution(A, y, FilterSpec.tikhonov(1e-2)))


def test_noise_free_limit(well_conditioned, rng):
    x_true = rng.standard_normal(6)
    y = well_conditioned @ x_true
    errors = [np.linalg.norm(filter_solution(well_conditioned, y, FilterSpec.tikhonov(alpha))
                             - x_true) for alpha in (1e-2, 1e-4, 1e-6, 1e-10)]
    assert np.all(np.diff(errors) < 0)
    assert errors[-1] < 1e-6


def test_apriori_alpha_examples():
    assert apriori_alpha(1e-3, 1.0, 2.0, 1) == pytest.approx(1e-2, rel=1e-12)
    assert apriori_alpha(1e-5, 1.0, 4.0, 2) == pytest.approx(1e-4, rel=1e-12)
    assert apriori_alpha(0.3, 0.3, 1.7, 3) == 1.0


def test_apriori_alpha_rejects_bad_input():
    with pytest.raises(InvalidParameterError):
        apriori_alpha(0.0, 1.0, 2.0)
    with pytest.raises(InvalidParameterError):
        apriori_alpha(1e-3, -1.0, 2.0)
    with pytest.raises(InvalidParameterError):
        apriori_alpha(1e-3, 1.0, -2.0)


@pytest.mark.parametrize("m", [0, -1, 0.5, 2.0, True])
def test_apriori_alpha_needs_integer_steps(m):
    with pytest.raises(InvalidParameterError):
        apriori_alpha(1e-3, 1.0, 2.0, m)


def test_general_alpha_examples():
    assert general_alpha(1e-2, 1.0, 0.5, 1.0, 1.0, 1.0) == pytest.approx(1e-2, rel=1e-12)
    assert general_alpha(1e-4, 1.0, 0.5, 3.0, 6.0, 2.0) == pytest.approx(1e-2, rel=1e-12)
    with pytest.raises(InvalidParameterError):
        general_alpha(1e-2, 1.0, 0.0, 1.0, 1.0, 1.0)


def test_order_optimal_alpha_agrees_with_apriori_for_one_step():
    for sigma in (0.5, 1.0, 2.0, 4.0):
        assert order_optimal_alpha(1e-4, 2.0, sigma) == pytest.approx(
            apriori_alpha(1e-4, 2.0, sigma, 1))


def test_worst_case_bound():
    assert worst_case_bound(1e-6, 1.0, 2.0) == pytest.approx(1e-4, rel=1e-12)
    assert worst_case_bound(1e-4, 8.0, 2.0) == pytest.approx(1e-4 ** (2 / 3) * 2.0, rel=1e-12)


def test_source_element_identity_power(rng):
    A = rng.standard_normal((4, 4))
    z = rng.standard_normal(4)
    element = source_element_from(singular_system(A), z, 0.0)
    assert_allclose(element.x, z, atol=1e-13)


def test_source_element_on_diagonal():
    E = 3.0
    z = np.array([1.0, 1.0]) * E / np.sqrt(2.0)
    element = source_element_from(singular_system(np.diag([2.0, 1.0])), z, 2.0)
    assert_allclose(element.x, np.array([4.0, 1.0]) * E / np.sqrt(2.0), rtol=1e-12)
    assert element.E == pytest.approx(E)


def test_make_source_element(rng):
    A = rng.standard_normal((5, 5))
    sys = singular_system(A)
    element = make_source_element(sys, 2.0, 0.7, seed=3)
    assert np.linalg.norm(element.z) == pytest.approx(0.7, rel=1e-14)
    assert element.E == 0.7
    gram = A.T @ A
    assert_allclose(element.x, gram @ element.z, rtol=1e-10, atol=1e-12)
    again = make_source_element(sys, 2.0, 0.7, seed=3)
    assert np.array_equal(element.x, again.x)
