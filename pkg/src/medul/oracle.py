"""Exact population quantities for finite joint distributions of (X, U, Y).

A :class:`DiscreteJoint` stores supports for X and U (rows are points, possibly
multivariate), a scalar support for Y, and the probability tensor ``p[i, j, k]``
of ``(xs[i], us[j], ys[k])``. Functions on X or U are value tables aligned with
``xs`` or ``us``. Everything here is an exact finite sum.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from medul.errors import (
    AssumptionViolated,
    DegenerateX,
    InvalidW,
    NotSymmetric,
    UndefinedConditional,
)

MAX_SUPPORT = 64
GAP_TOL = 1e-12


def _support(a, name):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] == 0:
        raise ValueError(f"{name} must be a non-empty list of points")
    if a.shape[0] > MAX_SUPPORT:
        raise ValueError(f"{name} has {a.shape[0]} points; at most {MAX_SUPPORT} allowed")
    if np.unique(a, axis=0).shape[0] != a.shape[0]:
        raise ValueError(f"{name} contains duplicate points")
    return a


@dataclass(frozen=True, eq=False)
class DiscreteJoint:
    xs: np.ndarray
    us: np.ndarray
    ys: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        xs, us = _support(self.xs, "xs"), _support(self.us, "us")
        ys = _support(self.ys, "ys")
        if ys.shape[1] != 1:
            raise ValueError("ys must be scalar")
        p = np.asarray(self.p, dtype=np.float64)
        if p.shape != (xs.shape[0], us.shape[0], ys.shape[0]):
            raise ValueError(f"p has shape {p.shape}, supports imply {(xs.shape[0], us.shape[0], ys.shape[0])}")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("probabilities must be finite and non-negative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "us", us)
        object.__setattr__(self, "ys", ys[:, 0])
        object.__setattr__(self, "p", p)

    # marginals -------------------------------------------------------------
    @property
    def p_x(self):
        return self.p.sum(axis=(1, 2))

    @property
    def p_u(self):
        return self.p.sum(axis=(0, 2))

    @property
    def p_xu(self):
        return self.p.sum(axis=2)

    @property
    def p_uy(self):
        return self.p.sum(axis=0)

    @property
    def p_xy(self):
        return self.p.sum(axis=1)

    def to_dict(self) -> dict:
        return {
            "xs": self.xs.tolist(),
            "us": self.us.tolist(),
            "ys": self.ys.tolist(),
            "shape": list(self.p.shape),
            "p": self.p.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, d) -> "DiscreteJoint":
        return cls(np.array(d["xs"]), np.array(d["us"]), np.array(d["ys"]), np.reshape(d["p"], d["shape"]))


def save_joint(J: DiscreteJoint, path) -> None:
    with open(path, "w") as fh:
        json.dump(J.to_dict(), fh)
        fh.write("\n")


def load_joint(path) -> DiscreteJoint:
    with open(path) as fh:
        d = json.load(fh)
    try:
        return DiscreteJoint.from_dict(d)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: not a joint distribution file ({exc!r})") from None


def _ratio(num, den):
    """Elementwise num/den with NaN where den == 0."""
    out = np.full(np.broadcast(num, den).shape, np.nan)
    np.divide(num, den, out=out, where=den > 0)
    return out


@dataclass(frozen=True)
class CondMeans:
    y_given_x: np.ndarray  # (nx,)
    y_given_u: np.ndarray  # (nu,)
    y_given_xu: np.ndarray  # (nx, nu)
    undefined: list  # (table name, index) pairs with zero-probability conditioning


def cond_means(J: DiscreteJoint) -> CondMeans:
    ey_xu = J.p @ J.ys  # sum_k p[i,j,k] y_k
    ex = _ratio(ey_xu.sum(axis=1), J.p_x)
    eu = _ratio(ey_xu.sum(axis=0), J.p_u)
    exu = _ratio(ey_xu, J.p_xu)
    undefined = [("y|x", int(i)) for i in np.flatnonzero(J.p_x == 0)]
    undefined += [("y|u", int(j)) for j in np.flatnonzero(J.p_u == 0)]
    undefined += [("y|x,u", (int(i), int(j))) for i, j in zip(*np.nonzero(J.p_xu == 0))]
    return CondMeans(ex, eu, exu, undefined)


def f_given_u(J: DiscreteJoint, f) -> np.ndarray:
    """Table of ``E[f(X) | U = u]`` (NaN where ``p(u) = 0``)."""
    f = np.asarray(f, dtype=np.float64)
    return _ratio(f @ J.p_xu, J.p_u)


def u_given_x(J: DiscreteJoint) -> np.ndarray:
    """``E[U | X = x]`` as an ``(nx, du)`` array."""
    return _ratio(J.p_xu @ J.us, J.p_x[:, None])


def _require_defined(table, weights, what):
    bad = np.flatnonzero(np.isnan(table) & (weights > 0))
    if bad.size:
        raise UndefinedConditional(f"{what} undefined at {bad.tolist()}", bad.tolist())


def _check_w(w):
    if not 0.0 < w < 1.0:
        raise InvalidW(f"w must lie in (0, 1), got {w}")


def population_mse(J: DiscreteJoint, f) -> float:
    """``E[(f(X) - Y)^2]``."""
    f = np.asarray(f, dtype=np.float64)
    sq = (f[:, None] - J.ys[None, :]) ** 2
    return float(np.sum(J.p_xy * sq))


def population_J(J: DiscreteJoint, f, h, w) -> float:
    """``(1/w) E[(f(X) - h(U))^2] + (1/(1-w)) E[(h(U) - Y)^2]``."""
    _check_w(w)
    f, h = np.asarray(f, dtype=np.float64), np.asarray(h, dtype=np.float64)
    bridge = np.sum(J.p_xu * (f[:, None] - h[None, :]) ** 2)
    fit = np.sum(J.p_uy * (h[:, None] - J.ys[None, :]) ** 2)
    return float(bridge / w + fit / (1.0 - w))


def assumption_gap(J: DiscreteJoint) -> float:
    """``E[(E[Y|U] - E[Y|U,X])^2]``; zero exactly when conditional mean independence holds."""
    cm = cond_means(J)
    w = J.p_xu
    diff = cm.y_given_u[None, :] - cm.y_given_xu
    return float(np.sum(np.where(w > 0, w * np.nan_to_num(diff) ** 2, 0.0)))


def min_h_population(J: DiscreteJoint, f, w):
    """Minimizer over value tables h of the population objective, and its value.

    ``h(u) = w E[Y|U=u] + (1-w) E[f(X)|U=u]``. Only valid when the joint satisfies
    conditional mean independence (gap <= 1e-12).
    """
    _check_w(w)
    gap = assumption_gap(J)
    if gap > GAP_TOL:
        raise AssumptionViolated(f"assumption gap {gap:.3e} exceeds {GAP_TOL}")
    cm = cond_means(J)
    fu = f_given_u(J, f)
    h = w * cm.y_given_u + (1.0 - w) * fu
    _require_defined(h, J.p_u, "h(u)")
    h = np.nan_to_num(h)  # zero-mass u values do not affect the objective
    return h, population_J(J, f, h, w)


def min_h_quadratic(J: DiscreteJoint, f, w) -> np.ndarray:
    """Minimize the population objective over h by solving its normal equations directly.

    The objective is a quadratic ``h^T H h - 2 g^T h + const`` in the h table;
    ``H`` and ``g`` are assembled term by term over all (x, u, y) outcomes.
    """
    f = np.asarray(f, dtype=np.float64)
    nu = J.us.shape[0]
    H = np.zeros((nu, nu))
    g = np.zeros(nu)
    for i in range(J.xs.shape[0]):
        for j in range(nu):
            for k in range(J.ys.shape[0]):
                m = J.p[i, j, k]
                if m == 0.0:
                    continue
                H[j, j] += m / w + m / (1.0 - w)
                g[j] += m * f[i] / w + m * J.ys[k] / (1.0 - w)
    live = np.diag(H) > 0
    h = np.zeros(nu)
    h[live] = np.linalg.solve(H[np.ix_(live, live)], g[live])
    return h


@dataclass(frozen=True)
class NaivePopulation:
    f_combine: np.ndarray
    f_integral: np.ndarray
    f_star: np.ndarray


def naive_population(J: DiscreteJoint, h_star=None) -> NaivePopulation:
    """Population limits of the chained and integral estimators next to ``E[Y|X]``.

    ``h_star`` is the analytic regression function of Y on U (a callable on
    ``(m, du)`` arrays). Without it, ``E[Y|U]`` is read from the table and
    ``E[U|X=x]`` must land exactly on a support point of U.
    """
    cm = cond_means(J)
    _require_defined(cm.y_given_x, np.ones_like(J.p_x), "E[Y|X]")
    _require_defined(cm.y_given_u, J.p_u, "E[Y|U]")
    h_tab = np.nan_to_num(cm.y_given_u)
    g = u_given_x(J)
    if h_star is not None:
        f_combine = np.asarray(h_star(g), dtype=np.float64).reshape(-1)
    else:
        f_combine = np.empty(J.xs.shape[0])
        for i, gx in enumerate(g):
            hit = np.flatnonzero(np.all(J.us == gx, axis=1))
            if hit.size == 0:
                raise UndefinedConditional(f"E[U|X={J.xs[i].tolist()}] is off the U support", [i])
            f_combine[i] = h_tab[hit[0]]
    f_integral = (J.p_xu @ h_tab) / J.p_x
    return NaivePopulation(f_combine, f_integral, cm.y_given_x)


@dataclass(frozen=True, eq=False)
class LeCamPair:
    c: float
    p1: DiscreteJoint
    p2: DiscreteJoint
    slope: float


def lecam_pair(c, xs, px, us, qu, sym_tol=1e-15) -> LeCamPair:
    """Two joints with X independent of U and Y = +/-(c/sigma) X.

    Their (X, U) and (U, Y) marginals coincide, so no amount of mediated
    uncoupled data separates them, yet their regression functions of Y on X
    differ by ``2c`` in L2.
    """
    xs = np.asarray(xs, dtype=np.float64).reshape(-1)
    px = np.asarray(px, dtype=np.float64)
    qu = np.asarray(qu, dtype=np.float64)
    if c < 0:
        raise ValueError("c must be non-negative")
    pos = {float(x): i for i, x in enumerate(xs)}
    for i, x in enumerate(xs):
        j = pos.get(float(-x))
        if j is None or abs(px[i] - px[j]) > sym_tol:
            raise NotSymmetric(f"p(x) is not symmetric at x={x}")
    mean = float(px @ xs)
    var = float(px @ xs**2) - mean**2
    if not var > 0:
        raise DegenerateX("Var[X] must be positive")
    sigma = float(np.sqrt(var))
    slope = c / sigma
    ys = np.unique(slope * xs)
    yidx = {float(y): k for k, y in enumerate(ys)}

    def build(s):
        p = np.zeros((xs.size, len(qu), ys.size))
        for i, x in enumerate(xs):
            p[i, :, yidx[float(s * x)]] = px[i] * qu
        return DiscreteJoint(xs, us, ys, p)

    return LeCamPair(float(c), build(slope), build(-slope), slope)


def rho(J1: DiscreteJoint, J2: DiscreteJoint) -> float:
    """``E_{X ~ p1(x)}[(E_1[Y|X] - E_2[Y|X])^2]`` for joints sharing the X support."""
    if not np.array_equal(J1.xs, J2.xs):
        raise ValueError("joints must share the X support")
    a, b = cond_means(J1).y_given_x, cond_means(J2).y_given_x
    w = J1.p_x
    return float(np.sum(np.where(w > 0, w * np.nan_to_num(a - b) ** 2, 0.0)))


# ---------------------------------------------------------------- instance builders


def random_joint(rng, nx=3, nu=3, ny=3, dx=1, du=1, satisfy=False, sparsity=0.0) -> DiscreteJoint:
    """Random joint on random distinct supports.

    With ``satisfy=True`` the tensor factorizes as ``p(x,u) p(y|u)``, so Y is
    conditionally independent of X given U.
    """
    def points(n, d):
        while True:
            pts = np.round(rng.normal(size=(n, d)), 6)
            if np.unique(pts, axis=0).shape[0] == n:
                return pts

    xs, us, ys = points(nx, dx), points(nu, du), points(ny, 1)[:, 0]
    if satisfy:
        pxu = rng.random((nx, nu))
        py_u = rng.random((nu, ny))
        py_u /= py_u.sum(axis=1, keepdims=True)
        p = pxu[:, :, None] * py_u[None, :, :]
    else:
        p = rng.random((nx, nu, ny))
    if sparsity > 0:
        p = p * (rng.random(p.shape) >= sparsity)
        if p.sum() == 0:
            p[0, 0, 0] = 1.0
    return DiscreteJoint(xs, us, ys, p / p.sum())


def jensen_instance(xs=(-1.0, 0.0, 1.0), spread=1.0):
    """U | X=x is x +/- spread with equal mass and Y = U^2 (a strictly convex h*)."""
    xs = np.asarray(xs, dtype=np.float64)
    us = np.unique(np.concatenate([xs - spread, xs + spread]))
    ys = np.unique(us**2)
    uidx = {float(u): j for j, u in enumerate(us)}
    yidx = {float(y): k for k, y in enumerate(ys)}
    p = np.zeros((xs.size, us.size, ys.size))
    for i, x in enumerate(xs):
        for u in (x - spread, x + spread):
            p[i, uidx[float(u)], yidx[float(u * u)]] += 0.5 / xs.size
    return DiscreteJoint(xs, us, ys, p), (lambda u: np.sum(np.asarray(u) ** 2, axis=-1))
