"""Pure numpy versions of the design-matrix kernels (import-time fallback)."""
import numpy as np


def rbf_design(X, C, bandwidth):
    X = np.ascontiguousarray(X, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    n = X.shape[0]
    out = np.empty((n, C.shape[0] + 1))
    out[:, 0] = 1.0
    # same summation order as the compiled loop, so both backends agree to rounding
    sq = np.zeros((n, C.shape[0]))
    for k in range(X.shape[1]):
        diff = X[:, k, None] - C[None, :, k]
        sq += diff * diff
    out[:, 1:] = np.exp(-sq * (1.0 / (2.0 * bandwidth * bandwidth)))
    return out


def poly_design(X, exponents):
    X = np.ascontiguousarray(X, dtype=np.float64)
    exponents = np.asarray(exponents, dtype=np.int64)
    top = int(exponents.max()) + 1 if exponents.size else 1
    # pw[e][:, k] = X[:, k] ** e by repeated multiplication, as in the compiled loop
    pw = [np.ones_like(X)]
    for _ in range(1, top):
        pw.append(pw[-1] * X)
    out = np.ones((X.shape[0], exponents.shape[0]))
    for r, powers in enumerate(exponents):
        for k, e in enumerate(powers):
            out[:, r] *= pw[e][:, k]
    return out
