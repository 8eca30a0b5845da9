"""Estimators for mediated uncoupled data with linear-in-parameter models.

``f(x) = alpha^T phi(x)`` predicts Y from X and ``h(u) = beta^T psi(u)``
predicts Y from U. Three ways of fitting are provided:

* ``fit_naive_chain``: regress U on X, regress Y on U, compose.
* ``fit_two_step`` (2Step-RR): regress Y on U, then regress h(U) on X.
* ``fit_joint_block`` (Joint-RR): minimize the weighted bridge + fit objective
  jointly, solved through the Schur complement of the ``alpha`` block.
  ``joint_full_solve`` is the stacked reference solution of the same problem.

Weights are always 2-D (``basis x k``) so multi-output Y works unchanged.
Regularization strengths may be ``"auto"``, in which case they are picked by
K-fold cross-validation on objectives computable from the uncoupled data alone.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from medul.datasets import PairSet
from medul.densela import gram, solve_spd
from medul.errors import DimensionMismatch, FormatVersionError, InvalidW
from medul.features import FeatureMap, FeatureMapSpec, fit_feature_map

FORMAT_VERSION = 1
LAMBDA_GRID = tuple(float(v) for v in np.logspace(-6, 0, 7))
DEFAULT_FOLDS = 5
DEFAULT_W = 0.5
METHODS = ("naive", "twostep", "joint")


def _check_w(w):
    if not 0.0 < w < 1.0:
        raise InvalidW(f"w must lie in (0, 1), got {w}")


def _as_2d(a):
    a = np.asarray(a, dtype=np.float64)
    return a[:, None] if a.ndim == 1 else a


def _resolve_spec(spec, dim) -> FeatureMapSpec:
    if isinstance(spec, str):
        return FeatureMapSpec.parse(spec, dim)
    if spec.input_dim != dim:
        return spec.with_dim(dim)
    return spec


def _check_roles(S_X: PairSet, S_Y: PairSet):
    if S_X.role != "XU" or S_Y.role != "UY":
        raise DimensionMismatch(f"expected S_X role XU and S_Y role UY, got {S_X.role}/{S_Y.role}")
    if S_X.right.shape[1] != S_Y.left.shape[1]:
        raise DimensionMismatch(f"U dimension differs: {S_X.right.shape[1]} vs {S_Y.left.shape[1]}")


@dataclass(eq=False)
class LinearModel:
    method: str
    f_map: FeatureMap
    alpha: np.ndarray
    h_map: FeatureMap | None = None
    beta: np.ndarray | None = None
    hyper: dict = field(default_factory=dict)

    def __post_init__(self):
        # C order so a reloaded model hits the same BLAS path bit for bit
        self.alpha = np.ascontiguousarray(self.alpha, dtype=np.float64)
        if self.beta is not None:
            self.beta = np.ascontiguousarray(self.beta, dtype=np.float64)

    @property
    def k(self) -> int:
        return self.alpha.shape[1]

    @property
    def theta(self) -> np.ndarray:
        """Stacked ``(alpha; beta)``."""
        return np.vstack([self.alpha, self.beta])

    def f(self, X) -> np.ndarray:
        return self.f_map.transform(X) @ self.alpha

    def h(self, U) -> np.ndarray:
        return self.h_map.transform(U) @ self.beta

    def predict(self, X) -> np.ndarray:
        return self.f(X)


@dataclass(eq=False)
class NaiveChainModel:
    g_map: FeatureMap
    g_weights: np.ndarray
    h_map: FeatureMap
    h_weights: np.ndarray
    hyper: dict = field(default_factory=dict)
    method: str = "naive"

    def __post_init__(self):
        self.g_weights = np.ascontiguousarray(self.g_weights, dtype=np.float64)
        self.h_weights = np.ascontiguousarray(self.h_weights, dtype=np.float64)
        if self.g_weights.shape[1] != self.h_map.input_dim:
            raise DimensionMismatch("g output dimension must equal h input dimension")

    @property
    def k(self) -> int:
        return self.h_weights.shape[1]

    def g(self, X) -> np.ndarray:
        return self.g_map.transform(X) @ self.g_weights

    def h(self, U) -> np.ndarray:
        return self.h_map.transform(U) @ self.h_weights

    def f(self, X) -> np.ndarray:
        return self.h(self.g(X))

    def predict(self, X) -> np.ndarray:
        return self.f(X)


# ---------------------------------------------------------------- solvers


def _ridge_from_stats(G, c, lam):
    A = G.copy()
    A[np.diag_indices_from(A)] += lam
    return solve_spd(A, c)


def _kfold(n, folds, rng):
    folds = max(2, min(folds, n))
    return np.array_split(rng.permutation(n), folds)


def cv_ridge_lambda(Phi, T, grid=LAMBDA_GRID, folds=DEFAULT_FOLDS, rng=None) -> float:
    """Pick the grid value with the smallest K-fold held-out squared error.

    Ties go to the smaller lambda. With fewer than two rows the largest grid
    value is returned.
    """
    Phi, T = _as_2d(Phi), _as_2d(T)
    n = Phi.shape[0]
    if n < 2:
        return float(max(grid))
    rng = np.random.default_rng(0) if rng is None else rng
    scores = np.zeros(len(grid))
    all_idx = np.arange(n)
    for held in _kfold(n, folds, rng):
        train = np.setdiff1d(all_idx, held, assume_unique=True)
        c = 1.0 / train.size
        G = gram(Phi[train], scale=c)
        rhs = c * (Phi[train].T @ T[train])
        for j, lam in enumerate(grid):
            W = _ridge_from_stats(G, rhs, lam)
            scores[j] += np.sum((Phi[held] @ W - T[held]) ** 2)
    return float(grid[int(np.argmin(scores))])


def _ridge(Phi, T, lam):
    n = Phi.shape[0]
    return _ridge_from_stats(gram(Phi, scale=1.0 / n), (Phi.T @ T) / n, lam)


def joint_block_solve(Phi, Psi, Psi2, Y2, w, lam):
    """Closed-form Joint-RR weights via the Schur complement.

    ``Phi``/``Psi`` are the X and U design matrices of S_X, ``Psi2``/``Y2`` the
    U design and targets of S_Y. Returns ``(alpha, beta)``.
    """
    _check_w(w)
    if not lam > 0:
        raise ValueError("lambda must be positive")
    Y2 = _as_2d(Y2)
    n, n2 = Phi.shape[0], Psi2.shape[0]
    if Psi.shape[0] != n or Y2.shape[0] != n2:
        raise DimensionMismatch("design matrices and targets disagree on sample counts")
    c1, c2 = 1.0 / (n * w), 1.0 / (n2 * (1.0 - w))
    M1 = gram(Phi, scale=c1)
    M1[np.diag_indices_from(M1)] += lam
    M2 = gram(Phi, Psi, scale=c1)
    M3 = gram(Psi, scale=c1) + gram(Psi2, scale=c2)
    M3[np.diag_indices_from(M3)] += lam
    b1 = c2 * (Psi2.T @ Y2)
    Z = solve_spd(M1, M2)
    S = M3 - M2.T @ Z
    S = 0.5 * (S + S.T)
    beta = solve_spd(S, b1)
    return Z @ beta, beta


def joint_full_solve(Phi, Psi, Psi2, Y2, w, lam):
    """Reference Joint-RR solution from the stacked ``(A + lam I) theta = b`` system."""
    _check_w(w)
    Y2 = _as_2d(Y2)
    n, n2 = Phi.shape[0], Psi2.shape[0]
    bF, bH = Phi.shape[1], Psi.shape[1]
    c1, c2 = 1.0 / (n * w), 1.0 / (n2 * (1.0 - w))
    D = np.hstack([Phi, -Psi])
    A = gram(D, scale=c1)
    A[bF:, bF:] += gram(Psi2, scale=c2)
    A[np.diag_indices_from(A)] += lam
    b = np.zeros((bF + bH, Y2.shape[1]))
    b[bF:] = c2 * (Psi2.T @ Y2)
    theta = solve_spd(A, b)
    return theta[:bF], theta[bF:]


def _design_J(Phi, Psi, Psi2, Y2, alpha, beta, w):
    bridge = np.sum((Phi @ alpha - Psi @ beta) ** 2) / (w * Phi.shape[0])
    fit = np.sum((Psi2 @ beta - Y2) ** 2) / ((1.0 - w) * Psi2.shape[0])
    return bridge + fit


def cv_joint_lambda(Phi, Psi, Psi2, Y2, w, grid=LAMBDA_GRID, folds=DEFAULT_FOLDS, rng=None) -> float:
    """Pick lambda minimizing held-out empirical J_w, folding S_X and S_Y in parallel."""
    Y2 = _as_2d(Y2)
    n, n2 = Phi.shape[0], Psi2.shape[0]
    if min(n, n2) < 2:
        return float(max(grid))
    rng = np.random.default_rng(0) if rng is None else rng
    k = max(2, min(folds, n, n2))
    fx, fy = _kfold(n, k, rng), _kfold(n2, k, rng)
    scores = np.zeros(len(grid))
    for hx, hy in zip(fx, fy):
        tx = np.setdiff1d(np.arange(n), hx, assume_unique=True)
        ty = np.setdiff1d(np.arange(n2), hy, assume_unique=True)
        for j, lam in enumerate(grid):
            a, b = joint_block_solve(Phi[tx], Psi[tx], Psi2[ty], Y2[ty], w, lam)
            scores[j] += _design_J(Phi[hx], Psi[hx], Psi2[hy], Y2[hy], a, b, w)
    return float(grid[int(np.argmin(scores))])


# ---------------------------------------------------------------- fitting


def fit_two_step(
    S_X: PairSet,
    S_Y: PairSet,
    f_spec,
    h_spec,
    lambda_h="auto",
    lambda_f="auto",
    seed: int = 0,
    folds: int = DEFAULT_FOLDS,
    grid=LAMBDA_GRID,
) -> LinearModel:
    """2Step-RR: ridge Y' on psi(U'), then ridge h~(U) on phi(X).

    The second step only sees S_X and the fitted h; Y values never enter it.
    """
    _check_roles(S_X, S_Y)
    X, U = S_X.left, S_X.right
    U2, Y2 = S_Y.left, S_Y.right
    h_map = fit_feature_map(_resolve_spec(h_spec, U2.shape[1]), U2, seed)
    f_map = fit_feature_map(_resolve_spec(f_spec, X.shape[1]), X, seed + 1)
    cv_rng = np.random.default_rng(seed + 3)

    Psi2 = h_map.transform(U2)
    if lambda_h == "auto":
        lambda_h = cv_ridge_lambda(Psi2, Y2, grid, folds, cv_rng)
    beta = _ridge(Psi2, Y2, float(lambda_h))

    Phi = f_map.transform(X)
    target = h_map.transform(U) @ beta
    if lambda_f == "auto":
        lambda_f = cv_ridge_lambda(Phi, target, grid, folds, cv_rng)
    alpha = _ridge(Phi, target, float(lambda_f))
    hyper = {"lambda_h": float(lambda_h), "lambda_f": float(lambda_f), "seed": int(seed)}
    return LinearModel("twostep", f_map, alpha, h_map, beta, hyper)


def fit_joint_block(
    S_X: PairSet,
    S_Y: PairSet,
    f_spec,
    h_spec,
    w: float = DEFAULT_W,
    lam="auto",
    seed: int = 0,
    folds: int = DEFAULT_FOLDS,
    grid=LAMBDA_GRID,
    solver=joint_block_solve,
) -> LinearModel:
    """Joint-RR with a single ridge penalty on the stacked weights."""
    _check_w(w)
    _check_roles(S_X, S_Y)
    X, U = S_X.left, S_X.right
    U2, Y2 = S_Y.left, S_Y.right
    h_map = fit_feature_map(_resolve_spec(h_spec, U2.shape[1]), U2, seed)
    f_map = fit_feature_map(_resolve_spec(f_spec, X.shape[1]), X, seed + 1)
    Phi, Psi, Psi2 = f_map.transform(X), h_map.transform(U), h_map.transform(U2)
    if lam == "auto":
        lam = cv_joint_lambda(Phi, Psi, Psi2, Y2, w, grid, folds, np.random.default_rng(seed + 3))
    alpha, beta = solver(Phi, Psi, Psi2, Y2, w, float(lam))
    hyper = {"w": float(w), "lambda": float(lam), "seed": int(seed)}
    return LinearModel("joint", f_map, alpha, h_map, beta, hyper)


def fit_joint_full(S_X, S_Y, f_spec, h_spec, w=DEFAULT_W, lam="auto", seed=0, **kw) -> LinearModel:
    """Joint-RR through the stacked full-matrix solve (reference path)."""
    return fit_joint_block(S_X, S_Y, f_spec, h_spec, w, lam, seed, solver=joint_full_solve, **kw)


def fit_naive_chain(
    S_X: PairSet,
    S_Y: PairSet,
    g_spec,
    h_spec,
    lambda_g="auto",
    lambda_h="auto",
    seed: int = 0,
    folds: int = DEFAULT_FOLDS,
    grid=LAMBDA_GRID,
) -> NaiveChainModel:
    """Naive chaining: multi-output ridge U on phi_g(X), ridge Y' on psi(U'), compose."""
    _check_roles(S_X, S_Y)
    X, U = S_X.left, S_X.right
    U2, Y2 = S_Y.left, S_Y.right
    h_map = fit_feature_map(_resolve_spec(h_spec, U2.shape[1]), U2, seed)
    g_map = fit_feature_map(_resolve_spec(g_spec, X.shape[1]), X, seed + 2)
    cv_rng = np.random.default_rng(seed + 3)

    Psi2 = h_map.transform(U2)
    if lambda_h == "auto":
        lambda_h = cv_ridge_lambda(Psi2, Y2, grid, folds, cv_rng)
    h_w = _ridge(Psi2, Y2, float(lambda_h))

    Phi_g = g_map.transform(X)
    if lambda_g == "auto":
        lambda_g = cv_ridge_lambda(Phi_g, U, grid, folds, cv_rng)
    g_w = _ridge(Phi_g, U, float(lambda_g))
    hyper = {"lambda_g": float(lambda_g), "lambda_h": float(lambda_h), "seed": int(seed)}
    return NaiveChainModel(g_map, g_w, h_map, h_w, hyper)


def fit_method(method, S_X, S_Y, f_spec="rbf:100", h_spec=None, g_spec=None, w=DEFAULT_W,
               lam="auto", seed=0, folds=DEFAULT_FOLDS, grid=LAMBDA_GRID):
    """Dispatch by method name; ``lam`` is shared by all stages unless ``"auto"``."""
    h_spec = f_spec if h_spec is None else h_spec
    g_spec = f_spec if g_spec is None else g_spec
    if method == "naive":
        return fit_naive_chain(S_X, S_Y, g_spec, h_spec, lam, lam, seed, folds, grid)
    if method == "twostep":
        return fit_two_step(S_X, S_Y, f_spec, h_spec, lam, lam, seed, folds, grid)
    if method == "joint":
        return fit_joint_block(S_X, S_Y, f_spec, h_spec, w, lam, seed, folds, grid)
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


# ---------------------------------------------------------------- evaluation


def predict(model, X) -> np.ndarray:
    X = _as_2d(X)
    return model.predict(X)


def mse(pred, truth) -> float:
    """Mean over rows of the squared l2 norm of the row difference."""
    pred, truth = _as_2d(pred), _as_2d(truth)
    if pred.shape != truth.shape:
        raise DimensionMismatch(f"shapes differ: {pred.shape} vs {truth.shape}")
    return float(np.sum((pred - truth) ** 2) / pred.shape[0])


def empirical_J(f, h, S_X: PairSet, S_Y: PairSet, w: float) -> float:
    """Weighted bridge + fit objective for callables ``f`` (on X) and ``h`` (on U)."""
    _check_w(w)
    bridge = np.sum((_as_2d(f(S_X.left)) - _as_2d(h(S_X.right))) ** 2) / (w * len(S_X))
    fit = np.sum((_as_2d(h(S_Y.left)) - S_Y.right) ** 2) / ((1.0 - w) * len(S_Y))
    return float(bridge + fit)


# ---------------------------------------------------------------- persistence


def model_to_dict(model) -> dict:
    d = {"format_version": FORMAT_VERSION, "method": model.method, "k": int(model.k), "hyper": model.hyper}
    if isinstance(model, NaiveChainModel):
        d.update(
            g_map=model.g_map.to_dict(),
            g_weights=model.g_weights.tolist(),
            h_map=model.h_map.to_dict(),
            beta=model.h_weights.tolist(),
        )
    else:
        d.update(f_map=model.f_map.to_dict(), alpha=model.alpha.tolist())
        if model.h_map is not None:
            d.update(h_map=model.h_map.to_dict(), beta=model.beta.tolist())
    return d


def model_from_dict(d: dict):
    if d.get("format_version") != FORMAT_VERSION:
        raise FormatVersionError(f"unsupported format_version {d.get('format_version')!r}")
    method = d["method"]
    if method == "naive":
        return NaiveChainModel(
            FeatureMap.from_dict(d["g_map"]),
            np.array(d["g_weights"], dtype=np.float64),
            FeatureMap.from_dict(d["h_map"]),
            np.array(d["beta"], dtype=np.float64),
            dict(d.get("hyper", {})),
        )
    h_map = FeatureMap.from_dict(d["h_map"]) if "h_map" in d else None
    beta = np.array(d["beta"], dtype=np.float64) if "beta" in d else None
    return LinearModel(
        method,
        FeatureMap.from_dict(d["f_map"]),
        np.array(d["alpha"], dtype=np.float64),
        h_map,
        beta,
        dict(d.get("hyper", {})),
    )


def save_model(model, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=1)
        fh.write("\n")


def load_model(path):
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatVersionError(f"{path}: not a model file ({exc})") from None
    return model_from_dict(d)
