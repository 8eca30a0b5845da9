import numpy as np
import pytest

from medul.datasets import (
    PairSet,
    SyntheticConfig,
    draw_triples,
    gen_synthetic,
    irreducible_error,
    read_csv,
    write_csv,
)
from medul.errors import DimensionMismatch, ParseError


def test_experiment_sizes():
    cfg = SyntheticConfig(dim=3, n=1000, n_prime=1000, n_test=10000, seed=1)
    sx, sy, test = gen_synthetic(cfg)
    assert (sx.left.shape, sx.right.shape) == ((1000, 3), (1000, 3))
    assert (sy.left.shape, sy.right.shape) == ((1000, 3), (1000, 1))
    assert (test.left.shape, test.right.shape) == ((10000, 3), (10000, 1))
    assert (sx.role, sy.role, test.role) == ("XU", "UY", "XY")


@pytest.mark.parametrize("setting", ["satisfied", "violated"])
def test_supports(setting):
    sx, sy, test = gen_synthetic(SyntheticConfig(dim=4, n=500, n_prime=500, n_test=500, setting=setting))
    assert np.all(np.abs(sx.left) <= 1) and np.all(np.abs(test.left) <= 1)
    assert np.all(np.abs(sx.right) <= 1.5) and np.all(np.abs(sy.left) <= 1.5)


class ZeroX:
    """RNG stand-in that forces X to zero and passes the rest through."""

    def __init__(self, rng):
        self.rng, self.calls = rng, 0

    def uniform(self, lo, hi, size):
        self.calls += 1
        return np.zeros(size) if self.calls == 1 else self.rng.uniform(lo, hi, size)

    def normal(self, loc, scale, size):
        return self.rng.normal(loc, scale, size)


def test_formula_at_origin():
    X, U, Y = draw_triples(ZeroX(np.random.default_rng(0)), 50, 3, "satisfied", 0.0)
    assert np.all(X == 0)
    assert np.allclose(Y[:, 0], np.sum(U**2, axis=1), rtol=0, atol=1e-15)
    assert np.all(np.abs(U) <= 0.5)


def test_violated_uses_x():
    X, U, Y = draw_triples(np.random.default_rng(1), 50, 2, "violated", 0.0)
    assert np.allclose(Y[:, 0], np.sum(X**2, axis=1), rtol=0, atol=1e-15)


def test_mean_of_y_matches_moments():
    # E||U||^2 = d (E X^6 + Var e_u) = 2 (1/7 + 1/12)
    _, sy, _ = gen_synthetic(SyntheticConfig(dim=2, n=1, n_prime=1_000_000, n_test=1, seed=11))
    y = sy.right[:, 0]
    se = y.std(ddof=1) / np.sqrt(y.size)
    assert abs(y.mean() - 2 * (1 / 7 + 1 / 12)) <= 3 * se


def test_irreducible_error_monte_carlo():
    cfg = SyntheticConfig(dim=2, n=1, n_prime=1, n_test=1_000_000, seed=5)
    _, _, test = gen_synthetic(cfg)
    r2 = (test.right[:, 0] - (np.sum(test.left**6, axis=1) + 2 / 12)) ** 2
    assert abs(r2.mean() - irreducible_error(cfg)) <= 4 * r2.std() / np.sqrt(r2.size)
    assert irreducible_error(SyntheticConfig(setting="violated", noise_y_var=0.3)) == 0.3


def test_same_seed_bit_identical():
    cfg = SyntheticConfig(dim=2, n=50, n_prime=60, n_test=70, seed=4)
    assert all(a == b for a, b in zip(gen_synthetic(cfg), gen_synthetic(cfg)))


def test_sub_streams_are_separate():
    a = gen_synthetic(SyntheticConfig(dim=2, n=50, n_prime=60, n_test=70, seed=4))
    b = gen_synthetic(SyntheticConfig(dim=2, n=50, n_prime=999, n_test=5, seed=4))
    assert a[0] == b[0]  # S_X does not depend on the other sizes
    assert not np.any(np.isin(a[0].right, a[1].left))


def test_invalid_config():
    with pytest.raises(ValueError):
        SyntheticConfig(n=0)
    with pytest.raises(ValueError):
        SyntheticConfig(setting="maybe")


def test_csv_round_trip(tmp_path, rng):
    ps = PairSet(rng.normal(size=(3, 2)) * 1e-7, rng.normal(size=(3, 1)), "XU")
    path = tmp_path / "xu.csv"
    write_csv(ps, path)
    assert read_csv(path, "XU", 2, 1) == ps
    assert read_csv(path, "XU") == ps


def test_csv_header_schema(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("x0,x1,u0\n1,2,3\n")
    ps = read_csv(path, "XU", 2, 1)
    assert ps.left.tolist() == [[1.0, 2.0]] and ps.right.tolist() == [[3.0]]
    with pytest.raises(DimensionMismatch):
        read_csv(path, "UY")


def test_csv_parse_error_names_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("u0,y0\n0.5,abc\n1,2\n")
    with pytest.raises(ParseError, match="row 2") as info:
        read_csv(path, "UY", 1, 1)
    assert info.value.row == 2 and info.value.column == 2


def test_csv_missing_file(tmp_path):
    with pytest.raises(OSError):
        read_csv(tmp_path / "nope.csv", "XY")


def test_pairset_validates():
    with pytest.raises(DimensionMismatch):
        PairSet(np.zeros((3, 1)), np.zeros((2, 1)), "XU")
    with pytest.raises(ValueError):
        PairSet(np.zeros((3, 1)), np.zeros((3, 1)), "UX")
