"""Kernel backend selection.

The compiled extension is used when it imports; set ``CROSSRIS_PURE_PYTHON=1``
to force the numpy implementation.
"""
import os

from . import _kernels_py

BACKEND = "python"
if os.environ.get("CROSSRIS_PURE_PYTHON") != "1":
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
else:
    _impl = _kernels_py

maxmin_ascent = _impl.maxmin_ascent
lp_bisect_grid = _impl.lp_bisect_grid

__all__ = ["BACKEND", "maxmin_ascent", "lp_bisect_grid"]
