"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
versions are used. Set ``RSAA_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _fallback

BACKEND = "python"
if os.environ.get("RSAA_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
else:
    _impl = _fallback

cn_tridiag_evolve = _impl.cn_tridiag_evolve
sublevel_flood = _impl.sublevel_flood
langevin_poly_hits = _impl.langevin_poly_hits

__all__ = ["BACKEND", "cn_tridiag_evolve", "sublevel_flood", "langevin_poly_hits"]
