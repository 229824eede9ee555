"""Kernel backend selection.

The compiled core is used when it imports and ``WICKSYS_PURE_PYTHON`` is not
set to a true value; otherwise the numpy fallback is used.
"""

import os

from . import _kernels_py

_FORCE_PURE = os.environ.get("WICKSYS_PURE_PYTHON", "").lower() in {"1", "true", "yes"}

try:
    if _FORCE_PURE:
        raise ImportError("pure-Python backend forced by WICKSYS_PURE_PYTHON")
    from . import _ckernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _kernels_py
    BACKEND = "python"

wick_convolve_dense = _impl.wick_convolve_dense
wick_correlate_dense = _impl.wick_correlate_dense
wick_dense = _impl.wick_dense


def backends():
    """Available kernel modules keyed by name (the fallback is always present)."""
    out = {"python": _kernels_py}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
