"""Kernel backend selection.

Imports the compiled extension when present, otherwise the numpy/Python
fallback.  `SVGLAB_PURE_PYTHON=1` forces the fallback (used by the parity
tests and the benchmark).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("SVGLAB_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

fill_mask = _impl.fill_mask
label_components = _impl.label_components
trace_boundary = _impl.trace_boundary


def backend_name() -> str:
    return _impl.BACKEND
