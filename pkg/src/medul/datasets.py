"""Mediated uncoupled data containers, the synthetic generators, and CSV I/O."""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from medul.errors import DimensionMismatch, ParseError

ROLES = {"XU": ("x", "u"), "UY": ("u", "y"), "XY": ("x", "y")}
SETTINGS = ("satisfied", "violated")


@dataclass(frozen=True, eq=False)
class PairSet:
    """Coupled samples of two variables; ``role`` says which two."""

    left: np.ndarray
    right: np.ndarray
    role: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"role must be one of {sorted(ROLES)}")
        left = np.asarray(self.left, dtype=np.float64)
        right = np.asarray(self.right, dtype=np.float64)
        if left.ndim == 1:
            left = left[:, None]
        if right.ndim == 1:
            right = right[:, None]
        if left.ndim != 2 or right.ndim != 2 or left.shape[0] != right.shape[0]:
            raise DimensionMismatch(f"left {left.shape} and right {right.shape} must be 2-D with equal rows")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    def __len__(self):
        return self.left.shape[0]

    def __eq__(self, other):
        return (
            isinstance(other, PairSet)
            and self.role == other.role
            and np.array_equal(self.left, other.left)
            and np.array_equal(self.right, other.right)
        )

    @property
    def header(self) -> list[str]:
        a, b = ROLES[self.role]
        return [f"{a}{i}" for i in range(self.left.shape[1])] + [f"{b}{i}" for i in range(self.right.shape[1])]

    def permuted(self, perm) -> "PairSet":
        return PairSet(self.left[perm], self.right[perm], self.role)


@dataclass(frozen=True)
class SyntheticConfig:
    dim: int = 2
    n: int = 1000
    n_prime: int = 1000
    n_test: int = 10000
    setting: str = "satisfied"
    noise_y_var: float = 0.1
    seed: int = 0

    def __post_init__(self):
        for name in ("dim", "n", "n_prime", "n_test"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.setting not in SETTINGS:
            raise ValueError(f"setting must be one of {SETTINGS}")
        if self.noise_y_var < 0:
            raise ValueError("noise_y_var must be >= 0")


def draw_triples(rng, n, dim, setting, noise_y_var):
    """Draw ``n`` (X, U, Y) triples of the cubic-mediator generator."""
    X = rng.uniform(-1.0, 1.0, size=(n, dim))
    U = X**3 + rng.uniform(-0.5, 0.5, size=(n, dim))
    base = U if setting == "satisfied" else X
    Y = np.sum(base**2, axis=1, keepdims=True) + rng.normal(0.0, np.sqrt(noise_y_var), size=(n, 1))
    return X, U, Y


def irreducible_error(cfg: SyntheticConfig) -> float:
    """``E[Var(Y | X)]`` of the generator, the floor of any predictor's test MSE.

    In the satisfied setting Y depends on the noisy U, so besides the output
    noise each coordinate adds ``E[Var(U_j^2 | X_j)] = 4 E[X^6] Var(e) + Var(e^2)
    = 1/21 + 1/180`` for ``e ~ Uniform[-1/2, 1/2]``.
    """
    if cfg.setting == "violated":
        return cfg.noise_y_var
    return cfg.noise_y_var + cfg.dim * (1.0 / 21.0 + 1.0 / 180.0)


def gen_synthetic(cfg: SyntheticConfig):
    """Return ``(S_X, S_Y, test)``, each drawn from its own sub-stream of ``cfg.seed``."""
    sx_seq, sy_seq, test_seq = np.random.SeedSequence(cfg.seed).spawn(3)
    args = (cfg.dim, cfg.setting, cfg.noise_y_var)
    X, U, _ = draw_triples(np.random.default_rng(sx_seq), cfg.n, *args)
    _, U2, Y2 = draw_triples(np.random.default_rng(sy_seq), cfg.n_prime, *args)
    Xt, _, Yt = draw_triples(np.random.default_rng(test_seq), cfg.n_test, *args)
    return PairSet(X, U, "XU"), PairSet(U2, Y2, "UY"), PairSet(Xt, Yt, "XY")


def write_csv(pairs: PairSet, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(pairs.header)
        for a, b in zip(pairs.left, pairs.right):
            w.writerow([repr(float(v)) for v in a] + [repr(float(v)) for v in b])


def read_csv(path, role: str, d_left: int | None = None, d_right: int | None = None) -> PairSet:
    """Read a CSV written by :func:`write_csv`.

    Dimensions are inferred from the header when not given. Parse errors report
    the 1-based file line (the header is line 1) and column.
    """
    if role not in ROLES:
        raise ValueError(f"role must be one of {sorted(ROLES)}")
    a, b = ROLES[role]
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty file", row=1)
    header = [h.strip() for h in rows[0]]
    if d_left is None:
        d_left = sum(1 for h in header if h.startswith(a))
    if d_right is None:
        d_right = sum(1 for h in header if h.startswith(b))
    expected = [f"{a}{i}" for i in range(d_left)] + [f"{b}{i}" for i in range(d_right)]
    if header != expected:
        raise DimensionMismatch(f"{path}: header {header} does not match expected {expected}")
    data = np.empty((len(rows) - 1, len(expected)))
    for r, row in enumerate(rows[1:]):
        line = r + 2
        if len(row) != len(expected):
            raise ParseError(f"{path}: row {line} has {len(row)} fields, expected {len(expected)}", row=line)
        for c, cell in enumerate(row):
            try:
                data[r, c] = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}: row {line}, column {c + 1} ({expected[c]}): not a number: {cell!r}",
                    row=line,
                    column=c + 1,
                ) from None
    return PairSet(data[:, :d_left], data[:, d_left:], role)


def read_inputs(path) -> np.ndarray:
    """Read only the ``x*`` columns of any CSV whose header starts with x columns."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty file", row=1)
    cols = [i for i, h in enumerate(rows[0]) if h.strip().startswith("x")]
    if not cols:
        raise DimensionMismatch(f"{path}: no x columns in header")
    out = np.empty((len(rows) - 1, len(cols)))
    for r, row in enumerate(rows[1:]):
        for j, c in enumerate(cols):
            try:
                out[r, j] = float(row[c])
            except (ValueError, IndexError):
                raise ParseError(f"{path}: row {r + 2}, column {c + 1}: bad value", row=r + 2, column=c + 1) from None
    return out


def write_matrix_csv(M, path, prefix="y") -> None:
    """Write a matrix with a ``y0,y1,...`` header; ``path`` may be an open text stream."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim == 1:
        M = M[:, None]

    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"{prefix}{i}" for i in range(M.shape[1])])
        for row in M:
            w.writerow([repr(float(v)) for v in row])

    if hasattr(path, "write"):
        emit(path)
    else:
        with open(path, "w", newline="") as fh:
            emit(fh)
