"""Kernel backend selection.

The compiled extension (_core) and the pure module (_kernels_py) export the
same functions with identical semantics and iteration order. The compiled
one wins when importable; DIRACTRANS_FORCE_PURE=1 forces the fallback.
"""

import os

from . import _kernels_py as _pure

if os.environ.get("DIRACTRANS_FORCE_PURE") == "1":
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"

find_transversal_cycle = _impl.find_transversal_cycle
find_transversal_path = _impl.find_transversal_path
count_transversals = _impl.count_transversals
graph_extremal_scan = _impl.graph_extremal_scan
family_extremal_scan = _impl.family_extremal_scan
compute_r_scan = _impl.compute_r_scan
expansion_scan = _impl.expansion_scan
hk_matching = _impl.hk_matching

KERNELS = (
    "find_transversal_cycle",
    "find_transversal_path",
    "count_transversals",
    "graph_extremal_scan",
    "family_extremal_scan",
    "compute_r_scan",
    "expansion_scan",
    "hk_matching",
)
