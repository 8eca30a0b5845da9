import numpy as np
import pytest

from medul import _kernels_py

try:
    from medul import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["python", "cython"])
def backend(request):
    if request.param == "cython":
        if _compiled is None:
            pytest.skip("compiled kernels not built")
        return _compiled
    return _kernels_py


def random_spd(rng, n, shift=1.0):
    G = rng.normal(size=(n, n))
    return G.T @ G + shift * np.eye(n)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
