"""Numeric kernels with a compiled fast path.

The compiled extension ``_ckern`` is selected at import when present;
otherwise the pure-numpy twin ``_pykern`` serves the same API. Set
``SPARSEDYN_PURE_PYTHON=1`` to force the fallback (useful for debugging
and for the backend benchmark).
"""
import os

from . import _pykern
from ._pykern import integrate_adaptive, poly_rhs

if os.environ.get("SPARSEDYN_PURE_PYTHON"):
    _impl = _pykern
    COMPILED = False
else:
    try:
        from . import _ckern as _impl
        COMPILED = True
    except ImportError:
        _impl = _pykern
        COMPILED = False

poly_eval = _impl.poly_eval
dopri5_poly = _impl.dopri5_poly

__all__ = [
    "COMPILED",
    "dopri5_poly",
    "integrate_adaptive",
    "poly_eval",
    "poly_rhs",
]
