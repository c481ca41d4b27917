"""SPD solve, eigenvalue extremes, and the weighted norm."""

import numpy as np
import pytest

from dynregret import (
    DimensionMismatch,
    InvalidConstants,
    NegativeQuadraticForm,
    NotPositiveDefinite,
    NotSymmetric,
    SpdBounds,
    a_norm,
    eig_extremes,
    spd_solve,
)
from conftest import random_spd


def test_spd_solve_identity():
    b = np.array([1.0, 2.0, 3.0])
    assert np.array_equal(spd_solve(np.eye(3), b), b)


def test_spd_solve_scalar_matrix():
    x = spd_solve(2.0 * np.eye(2), np.array([4.0, 6.0]))
    np.testing.assert_allclose(x, [2.0, 3.0], rtol=0, atol=1e-14)


def test_spd_solve_tridiagonal_multiply_back():
    A = np.array([[2.0, 1.0], [1.0, 2.0]])
    b = np.array([3.0, 3.0])
    x = spd_solve(A, b)
    np.testing.assert_allclose(x, [1.0, 1.0], atol=1e-12)
    assert np.linalg.norm(A @ x - b) <= 1e-10 * (1 + np.linalg.norm(b))


def test_spd_solve_rejects_indefinite():
    A = np.array([[1.0, 0.0], [0.0, -1.0]])
    with pytest.raises(NotPositiveDefinite):
        spd_solve(A, np.array([1.0, 1.0]))


def test_spd_solve_rejects_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        spd_solve(np.eye(2), np.ones(3))
    with pytest.raises(DimensionMismatch):
        spd_solve(np.ones((2, 3)), np.ones(2))


def test_spd_solve_residual_on_random_systems(rng):
    for _ in range(200):
        n = int(rng.integers(1, 12))
        A = random_spd(rng, n)
        b = rng.normal(size=n)
        x = spd_solve(A, b)
        assert np.linalg.norm(A @ x - b) <= 1e-10 * (1 + np.linalg.norm(b))


def test_spd_solve_recovers_known_solution_up_to_condition_1e6(rng):
    for _ in range(50):
        n = int(rng.integers(2, 10))
        evals = np.logspace(0, 6, n)
        Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        A = (Q * evals) @ Q.T
        A = 0.5 * (A + A.T)
        x_true = rng.normal(size=n)
        x = spd_solve(A, A @ x_true)
        assert np.linalg.norm(x - x_true) <= 1e-9 * (1 + np.linalg.norm(x_true))


def test_eig_extremes_diagonal():
    bounds = eig_extremes(np.diag([1.0, 3.0, 5.0]))
    assert bounds.lambda_min == pytest.approx(1.0, rel=1e-9)
    assert bounds.lambda_max == pytest.approx(5.0, rel=1e-9)


def test_eig_extremes_identity():
    for n in (1, 4, 9):
        bounds = eig_extremes(np.eye(n))
        assert bounds.lambda_min == pytest.approx(1.0, rel=1e-12)
        assert bounds.lambda_max == pytest.approx(1.0, rel=1e-12)


def test_eig_extremes_hand_characteristic_polynomial():
    # det([[2-t, 1], [1, 2-t]]) = (t-1)(t-3)
    bounds = eig_extremes(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert bounds.lambda_min == pytest.approx(1.0, rel=1e-9)
    assert bounds.lambda_max == pytest.approx(3.0, rel=1e-9)


def test_eig_extremes_scaling(rng):
    for _ in range(50):
        A = random_spd(rng, int(rng.integers(2, 8)))
        c = float(rng.uniform(0.1, 10.0))
        base = eig_extremes(A)
        scaled = eig_extremes(c * A)
        assert scaled.lambda_min == pytest.approx(c * base.lambda_min, rel=1e-9)
        assert scaled.lambda_max == pytest.approx(c * base.lambda_max, rel=1e-9)


def test_eig_extremes_rejects_asymmetric():
    with pytest.raises(NotSymmetric):
        eig_extremes(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_a_norm_euclidean_case():
    assert a_norm(np.array([3.0, 4.0]), np.eye(2)) == pytest.approx(5.0, rel=1e-15)


def test_a_norm_zero_vector():
    assert a_norm(np.zeros(3), np.eye(3)) == 0.0


def test_a_norm_diagonal_expansion():
    # 1*2*1 + 1*8*1 = 10
    val = a_norm(np.array([1.0, 1.0]), np.diag([2.0, 8.0]))
    assert val == pytest.approx(np.sqrt(10.0), rel=1e-15)


def test_a_norm_matches_euclidean_for_identity(rng):
    for _ in range(200):
        x = rng.normal(size=int(rng.integers(1, 10)))
        assert a_norm(x, np.eye(x.size)) == pytest.approx(np.linalg.norm(x), rel=1e-12)


def test_a_norm_rejects_clearly_negative_form():
    A = np.array([[-1.0, 0.0], [0.0, -1.0]])
    with pytest.raises(NegativeQuadraticForm):
        a_norm(np.array([1.0, 1.0]), A)


def test_spd_bounds_validation():
    with pytest.raises(NotPositiveDefinite):
        SpdBounds(0.0, 1.0)
    with pytest.raises(NotPositiveDefinite):
        SpdBounds(-1.0, 1.0)
    with pytest.raises(InvalidConstants):
        SpdBounds(2.0, 1.0)
    assert SpdBounds(2.0, 3.0).condition == pytest.approx(1.5)
