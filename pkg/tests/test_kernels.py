import os
import subprocess
import sys

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from medul import _kernels_py, kernels
from medul.features import monomial_exponents


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


def test_pure_python_switch():
    env = dict(os.environ, MEDUL_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import medul.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_rbf_design_matches_formula(backend, rng):
    X, C = rng.normal(size=(7, 3)), rng.normal(size=(4, 3))
    Z = backend.rbf_design(X, C, 0.7)
    d2 = ((X[:, None, :] - C[None, :, :]) ** 2).sum(-1)
    assert np.allclose(Z[:, 1:], np.exp(-d2 / (2 * 0.49)), rtol=1e-14, atol=0)
    assert np.all(Z[:, 0] == 1.0)


def test_poly_design_matches_power(backend, rng):
    X = rng.normal(size=(6, 2))
    E = monomial_exponents(2, 4)
    Z = backend.poly_design(X, E)
    ref = np.prod(X[:, None, :] ** E[None, :, :], axis=2)
    assert np.allclose(Z, ref, rtol=1e-13, atol=0)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(0, 30), m=st.integers(1, 20), d=st.integers(1, 6), seed=st.integers(0, 2**32 - 1),
       bw=st.floats(0.05, 5.0))
def test_backends_agree_rbf(n, m, d, seed, bw):
    compiled = getattr(kernels, "_impl")
    rng = np.random.default_rng(seed)
    X, C = rng.normal(size=(n, d)), rng.normal(size=(m, d))
    a, b = compiled.rbf_design(X, C, bw), _kernels_py.rbf_design(X, C, bw)
    assert a.shape == (n, m + 1)
    assert np.allclose(a, b, rtol=1e-14, atol=1e-300)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(0, 30), d=st.integers(1, 4), g=st.integers(1, 5), seed=st.integers(0, 2**32 - 1))
def test_backends_agree_poly(n, d, g, seed):
    compiled = getattr(kernels, "_impl")
    X = np.random.default_rng(seed).uniform(-2, 2, size=(n, d))
    E = monomial_exponents(d, g)
    assert np.array_equal(compiled.poly_design(X, E), _kernels_py.poly_design(X, E))
