"""Kernel selection.

The compiled extension is used when it imports; otherwise (or when
``EXPANDOLAB_PURE_PYTHON=1``) the pure-Python reference takes over.
"""
import os

from . import _pykernels

if os.environ.get("EXPANDOLAB_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

IMPLEMENTATION = _impl.IMPLEMENTATION
orbit = _impl.orbit
locate_many = _impl.locate_many
lyapunov_qr = _impl.lyapunov_qr
grid_overlap = _impl.grid_overlap
