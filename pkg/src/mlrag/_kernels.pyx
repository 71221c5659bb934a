# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: hashed character n-gram counts and exact top-k scoring.

Must stay bit-identical to ``_kernels_py``; tests compare both.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, uint32_t, uint8_t

cnp.import_array()

cdef extern from *:
    """
    #define MLRAG_FNV_OFFSET 14695981039346656037ULL
    #define MLRAG_FNV_PRIME 1099511628211ULL
    """
    uint64_t FNV_OFFSET "MLRAG_FNV_OFFSET"
    uint64_t FNV_PRIME "MLRAG_FNV_PRIME"

BACKEND = "cython"


cdef inline uint64_t _feed(uint64_t h, uint32_t cp) noexcept nogil:
    # FNV-1a over the UTF-8 bytes of one code point
    cdef uint8_t b[4]
    cdef int n, i
    if cp < 0x80:
        b[0] = <uint8_t>cp
        n = 1
    elif cp < 0x800:
        b[0] = <uint8_t>(0xC0 | (cp >> 6))
        b[1] = <uint8_t>(0x80 | (cp & 0x3F))
        n = 2
    elif cp < 0x10000:
        b[0] = <uint8_t>(0xE0 | (cp >> 12))
        b[1] = <uint8_t>(0x80 | ((cp >> 6) & 0x3F))
        b[2] = <uint8_t>(0x80 | (cp & 0x3F))
        n = 3
    else:
        b[0] = <uint8_t>(0xF0 | (cp >> 18))
        b[1] = <uint8_t>(0x80 | ((cp >> 12) & 0x3F))
        b[2] = <uint8_t>(0x80 | ((cp >> 6) & 0x3F))
        b[3] = <uint8_t>(0x80 | (cp & 0x3F))
        n = 4
    for i in range(n):
        h ^= b[i]
        h *= FNV_PRIME
    return h


def fnv1a64(str s):
    cdef uint64_t h = FNV_OFFSET
    cdef Py_UCS4 cp
    for cp in s:
        h = _feed(h, <uint32_t>cp)
    return h


def ngram_counts(str text, Py_ssize_t dim, tuple sizes=(2, 3)):
    """Term-frequency vector of hashed character n-grams (unnormalized)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(dim, dtype=np.float64)
    cdef Py_ssize_t length = len(text)
    cdef Py_ssize_t i, j, n
    cdef uint64_t h
    cdef cnp.uint32_t[::1] cps
    if length == 0:
        return out
    cps = np.frombuffer(text.encode("utf-32-le", "surrogatepass"), dtype=np.uint32).copy()
    for n in sizes:
        if n <= 0:
            continue
        for i in range(length - n + 1):
            h = FNV_OFFSET
            for j in range(i, i + n):
                h = _feed(h, cps[j])
            out[h % <uint64_t>dim] += 1.0
    return out


def dot_scores(cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] matrix,
               cnp.ndarray[cnp.float64_t, ndim=1] query):
    """Row-wise dot products, accumulated over nonzero query entries in index order."""
    cdef Py_ssize_t rows = matrix.shape[0]
    cdef Py_ssize_t dim = matrix.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(rows, dtype=np.float64)
    cdef Py_ssize_t r, j, m
    cdef double s, qj
    nz = np.flatnonzero(query)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cols = nz.astype(np.int64)
    cdef Py_ssize_t ncols = cols.shape[0]
    with nogil:
        for r in range(rows):
            s = 0.0
            for m in range(ncols):
                j = cols[m]
                s = s + matrix[r, j] * query[j]
            out[r] = s
    return out


def topk_positions(cnp.ndarray[cnp.float64_t, ndim=1] scores, Py_ssize_t k):
    """Positions of the k best scores; ties go to the lower position."""
    cdef Py_ssize_t n = scores.shape[0]
    if k > n:
        k = n
    cdef cnp.ndarray[cnp.int64_t, ndim=1] best = np.empty(k, dtype=np.int64)
    cdef Py_ssize_t filled = 0
    cdef Py_ssize_t i, p
    cdef double s
    if k <= 0:
        return best
    with nogil:
        for i in range(n):
            s = scores[i]
            if filled == k and not (s > scores[best[k - 1]]):
                continue
            # insertion: strictly-greater moves ahead, equal keeps earlier position first
            p = filled if filled < k else k - 1
            while p > 0 and s > scores[best[p - 1]]:
                if p < k:
                    best[p] = best[p - 1]
                p -= 1
            best[p] = i
            if filled < k:
                filled += 1
    return best
