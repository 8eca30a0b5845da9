"""Explicit basis expansions for the linear-in-parameter models.

Two families are supported: total-degree polynomials and Gaussian RBF bumps
centred on data points. Both always contain a constant feature so the fitted
models carry an intercept.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist

from medul import kernels
from medul.errors import DimensionMismatch, EmptySample

MEDIAN_SUBSAMPLE = 500


@dataclass(frozen=True)
class FeatureMapSpec:
    kind: str  # "poly" or "rbf"
    input_dim: int
    degree: int = 1
    num_centers: int = 100
    bandwidth: float | None = None  # None means the median heuristic

    def __post_init__(self):
        if self.kind not in ("poly", "rbf"):
            raise ValueError(f"unknown feature kind {self.kind!r}")
        if self.input_dim < 1:
            raise ValueError("input_dim must be >= 1")
        if self.kind == "poly" and self.degree < 1:
            raise ValueError("degree must be >= 1")
        if self.kind == "rbf":
            if self.num_centers < 1:
                raise ValueError("num_centers must be >= 1")
            if self.bandwidth is not None and not self.bandwidth > 0:
                raise ValueError("bandwidth must be positive")

    @classmethod
    def parse(cls, text: str, input_dim: int) -> "FeatureMapSpec":
        """Parse ``poly:<deg>``, ``rbf:<m>`` or ``rbf:<m>:<bandwidth>``."""
        parts = text.strip().split(":")
        try:
            if parts[0] == "poly" and len(parts) == 2:
                return cls("poly", input_dim, degree=int(parts[1]))
            if parts[0] == "rbf" and len(parts) in (2, 3):
                bw = None if len(parts) == 2 or parts[2] == "auto" else float(parts[2])
                return cls("rbf", input_dim, num_centers=int(parts[1]), bandwidth=bw)
        except ValueError as exc:
            raise ValueError(f"bad feature spec {text!r}: {exc}") from None
        raise ValueError(f"bad feature spec {text!r}; expected poly:<deg> or rbf:<m>")

    def with_dim(self, input_dim: int) -> "FeatureMapSpec":
        return FeatureMapSpec(self.kind, input_dim, self.degree, self.num_centers, self.bandwidth)

    def __str__(self):
        if self.kind == "poly":
            return f"poly:{self.degree}"
        bw = "auto" if self.bandwidth is None else repr(self.bandwidth)
        return f"rbf:{self.num_centers}:{bw}"


def monomial_exponents(dim: int, degree: int) -> np.ndarray:
    """Exponent rows of all monomials with total degree <= ``degree``.

    Ordered by total degree, constant first; within a degree the order follows
    ``combinations_with_replacement`` over the variables, so for two variables
    and degree 2 this gives 1, x1, x2, x1^2, x1 x2, x2^2.
    """
    rows = []
    for g in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(dim), g):
            e = [0] * dim
            for k in combo:
                e[k] += 1
            rows.append(e)
    return np.array(rows, dtype=np.int64).reshape(len(rows), dim)


@dataclass(frozen=True, eq=False)
class FeatureMap:
    spec: FeatureMapSpec
    bandwidth: float = 1.0
    centers: np.ndarray | None = None
    exponents: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.spec.kind == "rbf":
            if self.centers is None or self.centers.shape[1] != self.spec.input_dim:
                raise ValueError("RBF map needs centers of shape (m, input_dim)")
            if not self.bandwidth > 0:
                raise ValueError("bandwidth must be positive")
            object.__setattr__(self, "centers", np.ascontiguousarray(self.centers, dtype=np.float64))
        elif self.exponents is None:
            object.__setattr__(self, "exponents", monomial_exponents(self.spec.input_dim, self.spec.degree))

    @property
    def input_dim(self) -> int:
        return self.spec.input_dim

    @property
    def output_dim(self) -> int:
        if self.spec.kind == "rbf":
            return self.centers.shape[0] + 1
        return math.comb(self.spec.input_dim + self.spec.degree, self.spec.degree)

    def transform(self, X) -> np.ndarray:
        """Design matrix for the rows of ``X`` (shape ``(n, input_dim)``)."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1 and self.input_dim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[1] != self.input_dim:
            raise DimensionMismatch(f"expected (n, {self.input_dim}) inputs, got {X.shape}")
        X = np.ascontiguousarray(X)
        if self.spec.kind == "rbf":
            return kernels.rbf_design(X, self.centers, float(self.bandwidth))
        return kernels.poly_design(X, self.exponents)

    def __call__(self, X) -> np.ndarray:
        return self.transform(X)

    def to_dict(self) -> dict:
        d = {"kind": self.spec.kind, "input_dim": self.spec.input_dim}
        if self.spec.kind == "poly":
            d["degree"] = self.spec.degree
        else:
            d["num_centers"] = self.spec.num_centers
            d["bandwidth_spec"] = "auto" if self.spec.bandwidth is None else self.spec.bandwidth
            d["bandwidth"] = float(self.bandwidth)
            d["centers"] = self.centers.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureMap":
        if d["kind"] == "poly":
            return cls(FeatureMapSpec("poly", int(d["input_dim"]), degree=int(d["degree"])))
        bw_spec = d.get("bandwidth_spec", "auto")
        spec = FeatureMapSpec(
            "rbf",
            int(d["input_dim"]),
            num_centers=int(d["num_centers"]),
            bandwidth=None if bw_spec == "auto" else float(bw_spec),
        )
        centers = np.array(d["centers"], dtype=np.float64).reshape(-1, spec.input_dim)
        return cls(spec, bandwidth=float(d["bandwidth"]), centers=centers)


def median_bandwidth(samples, rng) -> float:
    """Median pairwise Euclidean distance over at most 500 subsampled rows (1.0 if zero)."""
    n = samples.shape[0]
    if n > MEDIAN_SUBSAMPLE:
        samples = samples[rng.choice(n, MEDIAN_SUBSAMPLE, replace=False)]
    if samples.shape[0] < 2:
        return 1.0
    med = float(np.median(pdist(samples)))
    return med if med > 0 else 1.0


def fit_feature_map(spec: FeatureMapSpec, samples, seed: int = 0) -> FeatureMap:
    """Build a concrete map from ``spec``; RBF centers are drawn from ``samples``."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 1 and spec.input_dim == 1:
        samples = samples[:, None]
    if samples.ndim != 2 or samples.shape[1] != spec.input_dim:
        raise DimensionMismatch(f"samples shape {samples.shape} does not match input_dim {spec.input_dim}")
    if spec.kind == "poly":
        return FeatureMap(spec)
    n = samples.shape[0]
    if n == 0:
        raise EmptySample("RBF feature map needs at least one sample")
    rng = np.random.default_rng(seed)
    m = spec.num_centers
    idx = rng.choice(n, m, replace=m > n)
    centers = samples[idx].copy()
    bw = spec.bandwidth if spec.bandwidth is not None else median_bandwidth(samples, rng)
    return FeatureMap(spec, bandwidth=bw, centers=centers)


def apply(fmap: FeatureMap, x) -> np.ndarray:
    """Feature vector of a single input point."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != fmap.input_dim:
        raise DimensionMismatch(f"expected {fmap.input_dim} coordinates, got {x.shape[0]}")
    return fmap.transform(x[None, :])[0]
