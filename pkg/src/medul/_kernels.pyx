# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled design-matrix kernels.

Both functions fill a preallocated row-major output in a single pass over the
inputs, avoiding the (n, m, d) temporaries the numpy versions create.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()


def rbf_design(const double[:, ::1] X, const double[:, ::1] C, double bandwidth):
    """Return ``(n, m + 1)`` with a leading constant column and Gaussian bumps."""
    cdef Py_ssize_t n = X.shape[0], m = C.shape[0], d = X.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc, diff
    cdef double gamma = 1.0 / (2.0 * bandwidth * bandwidth)
    out = np.empty((n, m + 1), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(n):
            o[i, 0] = 1.0
            for j in range(m):
                acc = 0.0
                for k in range(d):
                    diff = X[i, k] - C[j, k]
                    acc = acc + diff * diff
                o[i, j + 1] = exp(-acc * gamma)
    return out


def poly_design(const double[:, ::1] X, const cnp.int64_t[:, ::1] exponents):
    """Return ``(n, b)`` monomials; row ``r`` of ``exponents`` gives the powers of column ``r``."""
    cdef Py_ssize_t n = X.shape[0], b = exponents.shape[0], d = X.shape[1]
    cdef Py_ssize_t i, r, k, e
    cdef Py_ssize_t top = int(np.max(exponents)) + 1 if b and d else 1
    cdef double v
    out = np.empty((n, b), dtype=np.float64)
    pw_arr = np.empty((d, top), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double[:, ::1] pw = pw_arr
    with nogil:
        for i in range(n):
            # repeated multiplication, matching the fallback's rounding
            for k in range(d):
                pw[k, 0] = 1.0
                for e in range(1, top):
                    pw[k, e] = pw[k, e - 1] * X[i, k]
            for r in range(b):
                v = 1.0
                for k in range(d):
                    v = v * pw[k, exponents[r, k]]
                o[i, r] = v
    return out
