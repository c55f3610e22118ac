"""Backend selection for the numerical inner loops.

The compiled extension is used when it was built; set ``TGLSDV_PURE_PYTHON=1``
to force the numpy fallback.
"""

import os

from . import _pykernels

if os.environ.get("TGLSDV_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

hp_trend = _impl.hp_trend
bspline_basis = _impl.bspline_basis
subset_rss = _impl.subset_rss
