"""Kernel dispatch: the compiled extension when importable, NumPy otherwise.

Set ``PHASESTAB_PURE=1`` to force the NumPy path.
"""
import os

from . import _pykernels as python

try:
    if os.environ.get("PHASESTAB_PURE"):
        raise ImportError("pure mode requested")
    from . import _ckernels as compiled
except ImportError:
    compiled = None

_impl = compiled if compiled is not None else python
BACKEND = "cython" if compiled is not None else "numpy"

split_scan = _impl.split_scan
sinc_gap_sq = _impl.sinc_gap_sq
far_gap_sum = _impl.far_gap_sum
