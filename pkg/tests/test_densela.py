import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_spd
from medul.densela import gram, ridge_solve, solve_spd
from medul.errors import DimensionMismatch, NotSPD


def gauss_jordan_inverse(A):
    """Plain Gauss-Jordan elimination with partial pivoting, used as an independent oracle."""
    n = len(A)
    M = [list(map(float, row)) + [1.0 if i == j else 0.0 for j in range(n)] for i, row in enumerate(A)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(M[r][col]))
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [v / p for v in M[col]]
        for r in range(n):
            if r != col:
                factor = M[r][col]
                M[r] = [a - factor * b for a, b in zip(M[r], M[col])]
    return np.array([row[n:] for row in M])


def test_identity_returns_rhs(rng):
    B = rng.normal(size=(3, 4))
    assert np.allclose(solve_spd(np.eye(3), B), B, rtol=0, atol=1e-15)


def test_diagonal_case():
    X = solve_spd(np.diag([2.0, 2.0]), np.array([[2.0], [4.0]]))
    assert np.allclose(X, [[1.0], [2.0]], rtol=0, atol=1e-15)


def test_vector_rhs_keeps_shape():
    assert solve_spd(np.diag([2.0, 4.0]), np.array([2.0, 2.0])).shape == (2,)


@pytest.mark.parametrize("seed", range(5))
def test_matches_gauss_jordan_oracle(seed):
    rng = np.random.default_rng(seed)
    A = random_spd(rng, 5)
    B = rng.normal(size=(5, 3))
    X = solve_spd(A, B)
    ref = gauss_jordan_inverse(A) @ B
    assert np.linalg.norm(X - ref) / np.linalg.norm(ref) <= 1e-8
    assert np.linalg.norm(A @ X - B) / np.linalg.norm(B) <= 1e-8


def test_not_spd_raises():
    with pytest.raises(NotSPD):
        solve_spd(-np.eye(3), np.ones(3))


def test_asymmetric_rejected():
    with pytest.raises(NotSPD, match="symmetric"):
        solve_spd(np.array([[1.0, 0.5], [0.0, 1.0]]), np.ones(2))


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        solve_spd(np.eye(3), np.ones((2, 1)))
    with pytest.raises(DimensionMismatch):
        solve_spd(np.ones((2, 3)), np.ones(2))


def test_jitter_rescues_singular_psd():
    A = np.ones((3, 3))  # rank one
    X = solve_spd(A, np.ones(3))
    assert np.all(np.isfinite(X))


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 50), seed=st.integers(0, 2**32 - 1))
def test_inverse_reproduces_identity(n, seed):
    rng = np.random.default_rng(seed)
    A = random_spd(rng, n)
    Ainv = solve_spd(A, np.eye(n))
    assert np.linalg.norm(Ainv @ A - np.eye(n)) <= 1e-8


def test_deterministic_bitwise(rng):
    A, B = random_spd(rng, 20), rng.normal(size=(20, 2))
    assert np.array_equal(solve_spd(A, B), solve_spd(A, B))


def test_gram_symmetric(rng):
    P = rng.normal(size=(30, 7))
    G = gram(P, scale=0.3)
    assert np.array_equal(G, G.T)
    assert np.allclose(G, 0.3 * P.T @ P)


# ridge -------------------------------------------------------------------


def ridge_objective(Phi, T, W, lam, scale):
    return scale / Phi.shape[0] * np.sum((Phi @ W - T) ** 2) + lam * np.sum(W**2)


def test_ridge_identity_design_recovers_targets(rng):
    T = rng.normal(size=(6, 2))
    W = ridge_solve(np.eye(6), T, 1e-12)
    assert np.allclose(W, T, atol=1e-9)


def test_ridge_scalar_closed_form():
    W = ridge_solve(np.array([[1.0]]), np.array([[3.0]]), 0.5)
    assert W[0, 0] == pytest.approx(3.0 / 1.5, rel=1e-15)


def test_ridge_finite_difference_gradient(rng):
    Phi, T = rng.normal(size=(20, 4)), rng.normal(size=(20, 1))
    lam, scale = 0.1, 2.0
    W = ridge_solve(Phi, T, lam, scale)
    h = 1e-6
    grad = np.zeros_like(W)
    for idx in np.ndindex(W.shape):
        E = np.zeros_like(W)
        E[idx] = h
        grad[idx] = (ridge_objective(Phi, T, W + E, lam, scale) - ridge_objective(Phi, T, W - E, lam, scale)) / (2 * h)
    assert np.linalg.norm(grad) <= 1e-8


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 40), b=st.integers(1, 10), k=st.integers(1, 3),
       lam=st.floats(1e-6, 10.0), scale=st.floats(0.1, 10.0), seed=st.integers(0, 2**32 - 1))
def test_ridge_zeroes_analytic_gradient(n, b, k, lam, scale, seed):
    rng = np.random.default_rng(seed)
    Phi, T = rng.normal(size=(n, b)), rng.normal(size=(n, k))
    W = ridge_solve(Phi, T, lam, scale)
    g = scale / n * Phi.T @ (Phi @ W - T) + lam * W
    assert np.linalg.norm(g) <= 1e-8 * (1 + np.linalg.norm(T))


def test_ridge_rejects_bad_input():
    with pytest.raises(DimensionMismatch):
        ridge_solve(np.ones((3, 2)), np.ones((4, 1)), 1.0)
    with pytest.raises(ValueError):
        ridge_solve(np.ones((3, 2)), np.ones((3, 1)), 0.0)
