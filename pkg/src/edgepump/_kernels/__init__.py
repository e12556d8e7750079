"""Kernel backend selection.

The compiled extension is preferred; the pure-python reference module
is the fallback. Setting EDGEPUMP_FORCE_PYREF=1 in the environment
forces the fallback (useful for debugging and for benchmarking the two
backends against each other).
"""

import os

if os.environ.get("EDGEPUMP_FORCE_PYREF", "") not in ("", "0"):
    from . import _pyref as _impl
else:
    try:
        from . import _native as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pyref as _impl

BACKEND = _impl.BACKEND
tql2 = _impl.tql2
cn_evolve = _impl.cn_evolve
lyapunov_accum = _impl.lyapunov_accum

__all__ = ["BACKEND", "tql2", "cn_evolve", "lyapunov_accum"]
