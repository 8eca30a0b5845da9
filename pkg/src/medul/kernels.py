"""Backend selection for the hot design-matrix kernels.

The compiled extension is used when it was built; setting ``MEDUL_PURE_PYTHON=1``
forces the numpy fallback. ``BACKEND`` names whichever was picked.
"""
import os

from medul import _kernels_py

if os.environ.get("MEDUL_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from medul import _kernels as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

rbf_design = _impl.rbf_design
poly_design = _impl.poly_design

__all__ = ["BACKEND", "rbf_design", "poly_design"]
