import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from medul.errors import DimensionMismatch, EmptySample
from medul.features import FeatureMap, FeatureMapSpec, apply, fit_feature_map, median_bandwidth, monomial_exponents


def test_linear_poly_one_dim():
    fmap = fit_feature_map(FeatureMapSpec("poly", 1, degree=1), np.zeros((0, 1)))
    assert fmap.output_dim == 2
    assert apply(fmap, [5.0]).tolist() == [1.0, 5.0]


def test_quadratic_poly_one_dim():
    fmap = FeatureMap(FeatureMapSpec("poly", 1, degree=2))
    assert apply(fmap, [3.0]).tolist() == [1.0, 3.0, 9.0]


def test_two_dim_quadratic_order():
    fmap = FeatureMap(FeatureMapSpec("poly", 2, degree=2))
    assert fmap.output_dim == 6
    # 1, x1, x2, x1^2, x1 x2, x2^2
    assert apply(fmap, [2.0, 3.0]).tolist() == [1.0, 2.0, 3.0, 4.0, 6.0, 9.0]


@pytest.mark.parametrize("d,g", [(1, 1), (2, 3), (3, 2), (5, 4)])
def test_poly_output_dim_counts_monomials(d, g):
    E = monomial_exponents(d, g)
    assert E.shape[0] == math.comb(d + g, g)
    assert len({tuple(r) for r in E}) == E.shape[0]
    assert E.sum(axis=1).max() == g
    assert E[0].sum() == 0


def test_median_bandwidth_enumerated():
    # pairwise distances of {0, 1, 3} are {1, 3, 2}
    fmap = fit_feature_map(FeatureMapSpec("rbf", 1, num_centers=2), np.array([[0.0], [1.0], [3.0]]), seed=0)
    assert fmap.bandwidth == 2.0


def test_median_bandwidth_zero_falls_back():
    assert median_bandwidth(np.zeros((4, 2)), np.random.default_rng(0)) == 1.0


def test_rbf_hand_value():
    fmap = FeatureMap(FeatureMapSpec("rbf", 1, num_centers=1, bandwidth=1.0), bandwidth=1.0, centers=np.zeros((1, 1)))
    assert apply(fmap, [2.0])[1] == pytest.approx(0.1353352832366127, abs=1e-15)
    assert apply(fmap, [0.0]).tolist() == [1.0, 1.0]


def test_rbf_center_coordinate_is_one(rng):
    X = rng.normal(size=(50, 3))
    fmap = fit_feature_map(FeatureMapSpec("rbf", 3, num_centers=10), X, seed=4)
    for j, c in enumerate(fmap.centers):
        assert apply(fmap, c)[j + 1] == 1.0


def test_rbf_deterministic(rng):
    X = rng.normal(size=(40, 2))
    spec = FeatureMapSpec("rbf", 2, num_centers=15)
    a, b = fit_feature_map(spec, X, seed=9), fit_feature_map(spec, X, seed=9)
    assert np.array_equal(a.centers, b.centers) and a.bandwidth == b.bandwidth


def test_rbf_more_centers_than_samples(rng):
    X = rng.normal(size=(5, 2))
    fmap = fit_feature_map(FeatureMapSpec("rbf", 2, num_centers=12), X, seed=1)
    assert fmap.output_dim == 13
    assert all(any(np.array_equal(c, x) for x in X) for c in fmap.centers)


def test_rbf_empty_sample():
    with pytest.raises(EmptySample):
        fit_feature_map(FeatureMapSpec("rbf", 2, num_centers=3), np.zeros((0, 2)))


def test_dimension_checks():
    fmap = FeatureMap(FeatureMapSpec("poly", 2, degree=1))
    with pytest.raises(DimensionMismatch):
        apply(fmap, [1.0, 2.0, 3.0])
    with pytest.raises(DimensionMismatch):
        fit_feature_map(FeatureMapSpec("poly", 2), np.zeros((3, 3)))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 5), m=st.integers(1, 30))
def test_rbf_features_in_unit_interval(seed, d, m):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(25, d))
    fmap = fit_feature_map(FeatureMapSpec("rbf", d, num_centers=m), X, seed=seed)
    Z = fmap.transform(rng.normal(scale=0.5, size=(10, d)))
    assert np.all(Z[:, 0] == 1.0)
    assert np.all((Z[:, 1:] > 0) & (Z[:, 1:] <= 1))


def test_parse_and_str_round_trip():
    for text in ("poly:3", "rbf:200:auto", "rbf:5:0.25"):
        assert str(FeatureMapSpec.parse(text, 2)) == text
    assert FeatureMapSpec.parse("rbf:7", 1).bandwidth is None
    with pytest.raises(ValueError):
        FeatureMapSpec.parse("spline:3", 1)


def test_dict_round_trip_exact(rng):
    fmap = fit_feature_map(FeatureMapSpec("rbf", 2, num_centers=8), rng.normal(size=(30, 2)), seed=2)
    back = FeatureMap.from_dict(fmap.to_dict())
    assert np.array_equal(back.centers, fmap.centers) and back.bandwidth == fmap.bandwidth
    X = rng.normal(size=(5, 2))
    assert np.array_equal(back.transform(X), fmap.transform(X))
