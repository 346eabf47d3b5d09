"""Kernel backend selection.

The hot graph kernels (cycle enumeration, domination folding) exist twice:
as a compiled Cython extension (`thetapi._kernels`) and as a pure-Python
fallback (`thetapi._kernels_py`) with identical contracts and iteration
order.  The compiled backend is preferred when importable; setting the
environment variable ``THETAPI_PURE=1`` forces the fallback.
"""

from __future__ import annotations

import os

if os.environ.get("THETAPI_PURE") == "1":
    from . import _kernels_py as _impl

    _BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        _BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _impl

        _BACKEND = "python"

triangles = _impl.triangles
squares = _impl.squares
fold_dominated = _impl.fold_dominated


def backend_name() -> str:
    """Return which kernel backend is active: 'compiled' or 'python'."""
    return _BACKEND
