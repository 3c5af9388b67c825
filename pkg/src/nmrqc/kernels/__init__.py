"""Propagator kernels with a compiled core and a pure-Python fallback.

The Cython extension is used when it has been built (the default install
path); otherwise the numpy fallback is selected at import time.  Setting
NMRQC_PURE_PYTHON=1 forces the fallback, which the benchmark uses to
compare the two.
"""

import os

from . import _fallback

if os.environ.get("NMRQC_PURE_PYTHON"):
    _impl = _fallback
else:
    try:
        from . import _native as _impl
    except ImportError:
        _impl = _fallback

BACKEND = getattr(_impl, "BACKEND", "cython")
expm_hermitian = _impl.expm_hermitian
piecewise_propagator = _impl.piecewise_propagator

__all__ = ["BACKEND", "expm_hermitian", "piecewise_propagator"]
