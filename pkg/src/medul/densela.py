"""Dense SPD solves and ridge least squares.

Matrices are plain 2-D float64 numpy arrays (C order). Every system solved by
the estimators is symmetric positive definite by construction (lambda > 0), so
a Cholesky factorization is used throughout.
"""
from __future__ import annotations

import logging

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from medul.errors import DimensionMismatch, NotSPD

log = logging.getLogger(__name__)

SYMMETRY_RTOL = 1e-10
JITTER_START = 1e-12
JITTER_GROWTH = 10.0
MAX_JITTER_RETRIES = 3


def _as_matrix(a, name):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {a.shape}")
    return a


def solve_spd(A, B):
    """Solve ``A X = B`` for symmetric positive-definite ``A``.

    ``B`` may be 1-D or 2-D; the result has the same shape. On factorization
    failure a diagonal jitter of ``1e-12 * trace(A) / n`` is added and grown
    tenfold per retry, at most three retries.
    """
    A = _as_matrix(A, "A")
    B = np.asarray(B, dtype=np.float64)
    n = A.shape[0]
    if A.shape[1] != n:
        raise DimensionMismatch(f"A must be square, got {A.shape}")
    if B.ndim not in (1, 2) or B.shape[0] != n:
        raise DimensionMismatch(f"B has {B.shape[0] if B.ndim else 0} rows, A has {n}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
        raise NotSPD("non-finite entries")
    scale = max(np.abs(A).max(), np.finfo(float).tiny)
    if np.abs(A - A.T).max() > SYMMETRY_RTOL * scale:
        raise NotSPD("matrix is not symmetric")
    if n == 0:
        return B.copy()

    jitter = JITTER_START * max(np.trace(A) / n, np.finfo(float).tiny)
    M = A
    for attempt in range(MAX_JITTER_RETRIES + 1):
        try:
            factor = cho_factor(M, lower=True, check_finite=False)
        except LinAlgError:
            factor = None
        if factor is not None and np.all(np.diag(factor[0]) > 0):
            if attempt:
                log.debug("solve_spd succeeded with jitter %.3g", jitter / JITTER_GROWTH)
            return cho_solve(factor, B, check_finite=False)
        if attempt == MAX_JITTER_RETRIES:
            break
        M = A + jitter * np.eye(n)
        jitter *= JITTER_GROWTH
    raise NotSPD(f"Cholesky failed after {MAX_JITTER_RETRIES} jitter retries")


def gram(P, Q=None, scale=1.0):
    """``scale * P.T @ Q`` (``Q`` defaults to ``P``; the result is then exactly symmetric)."""
    P = _as_matrix(P, "P")
    if Q is None:
        G = scale * (P.T @ P)
        return 0.5 * (G + G.T)
    Q = _as_matrix(Q, "Q")
    if P.shape[0] != Q.shape[0]:
        raise DimensionMismatch(f"row counts differ: {P.shape[0]} vs {Q.shape[0]}")
    return scale * (P.T @ Q)


def ridge_solve(Phi, T, lam, scale=1.0):
    """Minimize ``(scale/n) ||Phi W - T||_F^2 + lam ||W||_F^2`` over ``W``.

    ``T`` may be a vector (single output) or an ``(n, k)`` matrix; ``W`` follows
    its shape.
    """
    Phi = _as_matrix(Phi, "Phi")
    T = np.asarray(T, dtype=np.float64)
    n, b = Phi.shape
    if n < 1:
        raise DimensionMismatch("ridge_solve needs at least one row")
    if T.shape[0] != n:
        raise DimensionMismatch(f"Phi has {n} rows, T has {T.shape[0]}")
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    c = scale / n
    A = gram(Phi, scale=c)
    A[np.diag_indices(b)] += lam
    return solve_spd(A, c * (Phi.T @ T))
