"""Kernel backend dispatch.

Prefers the compiled Cython kernels; falls back to the numpy implementation
when the extension is unavailable.  Set ``OCRSKIT_FORCE_PURE=1`` to force the
fallback (used by the benchmark and the backend-equivalence tests).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("OCRSKIT_FORCE_PURE"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND
select_count_policy = _impl.select_count_policy
select_partition_policy = _impl.select_partition_policy

__all__ = ["BACKEND", "select_count_policy", "select_partition_policy"]
