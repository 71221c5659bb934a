"""Kernel backend selection.

The compiled extension is used when importable; set ``MLRAG_PURE_PYTHON=1``
to force the numpy fallback.
"""

from __future__ import annotations

import os

if os.environ.get("MLRAG_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND: str = _impl.BACKEND
fnv1a64 = _impl.fnv1a64
ngram_counts = _impl.ngram_counts
dot_scores = _impl.dot_scores
topk_positions = _impl.topk_positions
