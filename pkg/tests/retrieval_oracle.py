"""Independent pure-Python reference for the embedder and exact search."""

import math
import unicodedata

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def fnv1a64(s):
    h = FNV_OFFSET
    for b in s.encode("utf-8"):
        h ^= b
        h = (h * FNV_PRIME) % 2**64
    return h


def embed(text, dim):
    t = " ".join(unicodedata.normalize("NFKC", text).casefold().split())
    v = [0.0] * dim
    for n in (2, 3):
        for i in range(len(t) - n + 1):
            v[fnv1a64(t[i:i + n]) % dim] += 1.0
    norm = math.sqrt(sum(x * x for x in v))
    return [x / norm for x in v] if norm else v


def brute_force(doc_vectors, q, k):
    """doc_vectors: list of (doc_id, vector). Sequential-sum dot products,
    sorted by score descending then doc id ascending."""
    scored = []
    for doc_id, vec in doc_vectors:
        s = 0.0
        for j in range(len(q)):
            s += vec[j] * q[j]
        scored.append((-s, doc_id))
    scored.sort()
    return [doc_id for _, doc_id in scored[:k]]
