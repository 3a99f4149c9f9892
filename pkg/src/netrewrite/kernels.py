"""Backend selection for the hot loops.

The compiled extension is used when it imports; setting
``NETREWRITE_PURE_PYTHON=1`` forces the reference implementation.
"""

from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("NETREWRITE_PURE_PYTHON") == "1":
    _impl = _pykernels
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND: str = _impl.BACKEND
traversal_code = _impl.traversal_code
canonical_components = _impl.canonical_components
connected_subsets = _impl.connected_subsets

__all__ = ["BACKEND", "traversal_code", "canonical_components", "connected_subsets"]
