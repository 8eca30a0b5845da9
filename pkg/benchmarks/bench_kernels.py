"""Time the compiled design-matrix kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from medul import _kernels_py
from medul.features import monomial_exponents

try:
    from medul import _kernels
except ImportError:
    _kernels = None

CASES = [
    ("rbf n=10000 m=200 d=2", "rbf", 10000, 200, 2),
    ("rbf n=10000 m=200 d=20", "rbf", 10000, 200, 20),
    ("rbf n=1000 m=200 d=10", "rbf", 1000, 200, 10),
    ("poly n=10000 d=2 deg=6", "poly", 10000, 6, 2),
    ("poly n=10000 d=5 deg=3", "poly", 10000, 3, 5),
]


def make_call(impl, kind, n, m, d, rng):
    X = rng.uniform(-1, 1, size=(n, d))
    if kind == "rbf":
        C = np.ascontiguousarray(X[rng.choice(n, m)])
        return lambda: impl.rbf_design(X, C, 0.8)
    E = monomial_exponents(d, m)
    return lambda: impl.poly_design(X, E)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation` first")
        return
    print(f"{'case':<28}{'numpy ms':>10}{'cython ms':>11}{'speedup':>9}{'max |diff|':>13}")
    for name, kind, n, m, d in CASES:
        res = {}
        for label, impl in (("py", _kernels_py), ("cy", _kernels)):
            call = make_call(impl, kind, n, m, d, np.random.default_rng(0))
            res[label] = (min(timeit.repeat(call, number=1, repeat=args.repeat)) * 1e3, call())
        diff = float(np.max(np.abs(res["py"][1] - res["cy"][1])))
        print(f"{name:<28}{res['py'][0]:>10.2f}{res['cy'][0]:>11.2f}{res['py'][0] / res['cy'][0]:>8.1f}x{diff:>13.2e}")


if __name__ == "__main__":
    main()
