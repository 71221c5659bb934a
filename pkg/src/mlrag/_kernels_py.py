"""Pure-Python/numpy fallback for the compiled kernels in ``_kernels.pyx``.

Every function here returns bit-identical results to its compiled twin.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

BACKEND = "python"

_FNV_OFFSET = 14695981039346656037
_FNV_PRIME = 1099511628211
_MASK = (1 << 64) - 1


@lru_cache(maxsize=1 << 18)
def fnv1a64(s: str) -> int:
    h = _FNV_OFFSET
    for b in s.encode("utf-8", "surrogatepass"):
        h = ((h ^ b) * _FNV_PRIME) & _MASK
    return h


def ngram_counts(text: str, dim: int, sizes: tuple = (2, 3)) -> np.ndarray:
    out = np.zeros(dim, dtype=np.float64)
    for n in sizes:
        if n <= 0:
            continue
        for i in range(len(text) - n + 1):
            out[fnv1a64(text[i:i + n]) % dim] += 1.0
    return out


def dot_scores(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    # column-sequential accumulation: same operation order as the compiled loop
    out = np.zeros(matrix.shape[0], dtype=np.float64)
    for j in np.flatnonzero(query):
        out = out + matrix[:, j] * query[j]
    return out


def topk_positions(scores: np.ndarray, k: int) -> np.ndarray:
    n = scores.shape[0]
    k = min(max(k, 0), n)
    order = np.argsort(-scores, kind="stable")
    return order[:k].astype(np.int64)
