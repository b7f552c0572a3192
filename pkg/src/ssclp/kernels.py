"""Backend selection for the hot kernels.

The compiled extension is used when importable; setting
``SSCLP_PURE_PYTHON=1`` forces the NumPy fallback.
"""
import os

from . import _fallback

BACKEND = "python"
if not os.environ.get("SSCLP_PURE_PYTHON"):
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
else:
    _impl = _fallback

bp_simplex = _impl.bp_simplex
lasso_cd = _impl.lasso_cd
polar_vertex_max = _impl.polar_vertex_max

OPTIMAL, INFEASIBLE, FAILED = 0, 1, 2
