"""Kernel backend selection.

The compiled extension is used when it imports; setting ``DEMEST_PURE_PYTHON=1``
forces the numpy fallback (useful for debugging and for the benchmark).
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if not os.environ.get("DEMEST_PURE_PYTHON"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _kernels_py

xor_bits = _impl.xor_bits
coincidence_counts = _impl.coincidence_counts
pattern_counts = _impl.pattern_counts
match_dp = _impl.match_dp

__all__ = ["BACKEND", "xor_bits", "coincidence_counts", "pattern_counts", "match_dp"]
