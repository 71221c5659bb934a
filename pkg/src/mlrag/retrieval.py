"""Dense retrieval: reference embedder, exact top-k search, dot-score rerank."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import unicodedata
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import numpy as np

from . import kernels
from .corpus import Corpus, Document, QueryItem
from .errors import DataError, ProviderError, ScopeError
from .langs import PIVOT

logger = logging.getLogger(__name__)

NGRAM_SIZES = (2, 3)
MIN_DIM = 16

SL = "SL"
EN = "EN"
EN_PLUS_SL = "EN_PLUS_SL"
ALL = "ALL"
SCOPES = (SL, EN, EN_PLUS_SL, ALL)
_SCOPE_ALIASES = {"sl": SL, "en": EN, "en+sl": EN_PLUS_SL, "en_plus_sl": EN_PLUS_SL, "all": ALL}

INDEX_MAGIC = b"MLRAGIDX"
INDEX_VERSION = 1


def parse_scope(value: str) -> str:
    if value in SCOPES:
        return value
    try:
        return _SCOPE_ALIASES[value.lower()]
    except KeyError:
        raise ValueError(f"unknown scope {value!r}; expected one of sl, en, en+sl, all") from None


def _prepare(text: str) -> str:
    return " ".join(unicodedata.normalize("NFKC", text).casefold().split())


def embed_text(text: str, dim: int = 512) -> np.ndarray:
    """Hashed character 2/3-gram term-frequency vector, L2-normalized.

    Whitespace-only text gives the zero vector, which ``is_indexable``
    rejects.
    """
    if dim < MIN_DIM:
        raise ValueError(f"dim must be >= {MIN_DIM}, got {dim}")
    counts = kernels.ngram_counts(_prepare(text), dim, NGRAM_SIZES)
    norm = float(np.sqrt(np.dot(counts, counts)))
    if norm == 0.0:
        return counts
    return counts / norm


def is_indexable(vec: np.ndarray) -> bool:
    return bool(np.any(vec))


class Embedder(Protocol):
    embedder_id: str
    dim: int

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


class ReferenceEmbedder:
    """Local, deterministic stand-in for a multilingual embedding service."""

    def __init__(self, dim: int = 512):
        if dim < MIN_DIM:
            raise ValueError(f"dim must be >= {MIN_DIM}, got {dim}")
        self.dim = dim
        self.embedder_id = f"reference-ngram23-d{dim}"

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for i, text in enumerate(texts):
            out[i] = embed_text(text, self.dim)
        return out


@dataclass(frozen=True)
class RetrievedPassage:
    doc: Document
    score: float
    rank: int
    lang: str
    text: str = ""
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.text:
            object.__setattr__(self, "text", self.doc.evidence_text)

    @property
    def doc_id(self) -> str:
        return self.doc.id

    def to_record(self) -> dict:
        return {"doc_id": self.doc.id, "rank": self.rank, "score": self.score,
                "lang": self.lang, "orig_lang": self.doc.lang, "text": self.text,
                **({"provenance": self.provenance} if self.provenance else {})}


class VectorIndex:
    """Immutable exact index. Entries are kept in ascending doc-id order so
    that positional tie-breaking equals doc-id tie-breaking."""

    def __init__(self, docs: Sequence[Document], matrix: np.ndarray, embedder_id: str,
                 scope: Iterable[str]):
        if matrix.ndim != 2 or matrix.shape[0] != len(docs):
            raise ValueError("matrix rows must match documents")
        order = sorted(range(len(docs)), key=lambda i: docs[i].id)
        self.docs: tuple[Document, ...] = tuple(docs[i] for i in order)
        ids = [d.id for d in self.docs]
        if len(set(ids)) != len(ids):
            raise DataError("duplicate document ids in index")
        m = np.ascontiguousarray(matrix[order], dtype=np.float64)
        m.setflags(write=False)
        self.matrix = m
        self.dim = int(matrix.shape[1])
        self.embedder_id = embedder_id
        self.scope = frozenset(scope)
        stray = {d.lang for d in self.docs} - self.scope
        if stray:
            raise DataError(f"index entries outside scope: {sorted(stray)}")
        self._pos = {d.id: i for i, d in enumerate(self.docs)}

    def __len__(self) -> int:
        return len(self.docs)

    def vector(self, doc_id: str) -> np.ndarray:
        return self.matrix[self._pos[doc_id]]

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._pos

    def subset(self, langs: Iterable[str]) -> "VectorIndex":
        langs = frozenset(langs)
        rows = [i for i, d in enumerate(self.docs) if d.lang in langs]
        return VectorIndex([self.docs[i] for i in rows], self.matrix[rows], self.embedder_id, langs)


def _embed_documents(docs: Sequence[Document], embedder: Embedder) -> np.ndarray:
    try:
        return np.asarray(embedder.embed([d.evidence_text for d in docs]), dtype=np.float64)
    except ProviderError:
        raise
    except Exception as exc:  # embedder failure, report first doc of the batch
        first = docs[0].id if docs else "?"
        raise ProviderError(f"embedder {embedder.embedder_id} failed near doc {first!r}: {exc}",
                            stage="embed") from exc


def build_index(corpus_view: Corpus | Sequence[Document], embedder: Embedder,
                dim: int | None = None, batch_size: int = 256) -> VectorIndex:
    docs = list(corpus_view)
    dim = dim or embedder.dim
    if dim != embedder.dim:
        raise ValueError(f"embedder dim {embedder.dim} != requested dim {dim}")
    rows: list[np.ndarray] = []
    kept: list[Document] = []
    for start in range(0, len(docs), batch_size):
        batch = docs[start:start + batch_size]
        vecs = _embed_documents(batch, embedder)
        if vecs.shape != (len(batch), dim):
            raise ProviderError(f"embedder {embedder.embedder_id} returned shape {vecs.shape}",
                                stage="embed")
        for doc, vec in zip(batch, vecs):
            if not is_indexable(vec):
                logger.warning("document %r embeds to the zero vector; excluded", doc.id)
                continue
            kept.append(doc)
            rows.append(vec)
    matrix = np.vstack(rows) if rows else np.zeros((0, dim))
    scope = corpus_view.languages if isinstance(corpus_view, Corpus) else {d.lang for d in docs}
    return VectorIndex(kept, matrix, embedder.embedder_id, scope)


def search(index: VectorIndex, qvec: np.ndarray, k: int) -> list[RetrievedPassage]:
    """Exact top-k by dot product; ties go to the smaller doc id."""
    qvec = np.asarray(qvec, dtype=np.float64)
    if qvec.ndim != 1 or qvec.shape[0] != index.dim:
        raise ValueError(f"query dimension {qvec.shape} does not match index dim {index.dim}")
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0 or len(index) == 0:
        return []
    scores = kernels.dot_scores(index.matrix, qvec)
    pos = kernels.topk_positions(scores, k)
    return [RetrievedPassage(doc=index.docs[p], score=float(scores[p]), rank=r,
                             lang=index.docs[p].lang)
            for r, p in enumerate(pos, 1)]


def rerank(query_text: str, candidates: Sequence[RetrievedPassage], k2: int, embedder: Embedder,
           vectors: VectorIndex | None = None) -> list[RetrievedPassage]:
    """Re-score candidates by dot(embed(query), embed(doc)) and keep the best ``k2``.

    ``vectors`` lets callers reuse document vectors already held by an index
    built with the same embedder.
    """
    if k2 <= 0:
        raise ValueError("k2 must be positive")
    if not candidates:
        return []
    cands = sorted(candidates, key=lambda p: p.doc.id)
    qvec = np.asarray(embedder.embed([query_text])[0], dtype=np.float64)
    if vectors is not None and vectors.embedder_id == embedder.embedder_id and \
            all(p.doc.id in vectors for p in cands):
        matrix = np.vstack([vectors.vector(p.doc.id) for p in cands])
    else:
        matrix = _embed_documents([p.doc for p in cands], embedder)
    scores = kernels.dot_scores(np.ascontiguousarray(matrix), qvec)
    pos = kernels.topk_positions(scores, k2)
    return [replace(cands[p], score=float(scores[p]), rank=r) for r, p in enumerate(pos, 1)]


def resolve_scope(scope: str, query_lang: str, corpus: Corpus) -> frozenset[str]:
    scope = parse_scope(scope)
    if scope == SL:
        langs = {query_lang}
    elif scope == EN:
        langs = {PIVOT}
    elif scope == EN_PLUS_SL:
        langs = {PIVOT, query_lang}
    else:
        langs = set(corpus.languages)
    if not any(corpus.bucket(lang) for lang in langs):
        missing = ", ".join(sorted(langs))
        raise ScopeError(f"scope {scope} for query language {query_lang!r} is empty: "
                         f"corpus {corpus.name!r} has no documents in {missing}")
    return frozenset(langs)


class IndexCache:
    """Lazily materialized per-scope indices.

    Documents are embedded once per (corpus, embedder); scope indices are row
    subsets of that matrix. With ``cache_dir`` the full matrix is persisted in
    a content-addressed file so later runs skip embedding.
    """

    def __init__(self, cache_dir: str | Path | None = None):
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self._lock = threading.Lock()
        self._key_locks: dict[tuple, threading.Lock] = {}
        self._full: dict[tuple, VectorIndex] = {}
        self._scoped: dict[tuple, VectorIndex] = {}
        self._fingerprints: dict[int, tuple[Corpus, str]] = {}

    def _fingerprint(self, corpus: Corpus) -> str:
        with self._lock:
            hit = self._fingerprints.get(id(corpus))
            if hit is not None and hit[0] is corpus:
                return hit[1]
        fp = corpus.fingerprint()
        with self._lock:
            self._fingerprints[id(corpus)] = (corpus, fp)
        return fp

    def _key_lock(self, key: tuple) -> threading.Lock:
        with self._lock:
            return self._key_locks.setdefault(key, threading.Lock())

    def full_index(self, corpus: Corpus, embedder: Embedder) -> VectorIndex:
        key = (self._fingerprint(corpus), embedder.embedder_id, embedder.dim)
        idx = self._full.get(key)
        if idx is not None:
            return idx
        with self._key_lock(key):
            idx = self._full.get(key)
            if idx is None:
                idx = self._load(key, corpus)
                if idx is None:
                    idx = build_index(corpus, embedder)
                    self._store(key, idx)
                self._full[key] = idx
        return idx

    def get(self, corpus: Corpus, langs: Iterable[str], embedder: Embedder) -> VectorIndex:
        langs = frozenset(langs)
        key = (self._fingerprint(corpus), langs, embedder.embedder_id, embedder.dim)
        idx = self._scoped.get(key)
        if idx is None:
            full = self.full_index(corpus, embedder)
            with self._key_lock(key):
                idx = self._scoped.get(key)
                if idx is None:
                    idx = full.subset(langs)
                    self._scoped[key] = idx
        return idx

    def _path(self, key: tuple) -> Path | None:
        if self.cache_dir is None:
            return None
        digest = hashlib.sha256(json.dumps(list(key)).encode("utf-8")).hexdigest()
        return self.cache_dir / "index" / f"{digest}.idx"

    def _store(self, key: tuple, index: VectorIndex) -> None:
        path = self._path(key)
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(f".tmp{os.getpid()}.{threading.get_ident()}")
        with tmp.open("wb") as fh:
            write_index(fh, index)
        os.replace(tmp, path)

    def _load(self, key: tuple, corpus: Corpus) -> VectorIndex | None:
        path = self._path(key)
        if path is None or not path.exists():
            return None
        try:
            with path.open("rb") as fh:
                return read_index(fh, corpus)
        except (DataError, ValueError, KeyError) as exc:
            logger.warning("ignoring unreadable index cache %s: %s", path, exc)
            return None


def write_index(fh, index: VectorIndex) -> None:
    """Binary layout: magic, version byte, u32 header length, JSON header,
    row-major little-endian float64 matrix."""
    header = json.dumps({"ids": [d.id for d in index.docs], "dim": index.dim,
                         "embedder_id": index.embedder_id,
                         "scope": sorted(index.scope)}).encode("utf-8")
    fh.write(INDEX_MAGIC)
    fh.write(bytes([INDEX_VERSION]))
    fh.write(len(header).to_bytes(4, "little"))
    fh.write(header)
    fh.write(index.matrix.astype("<f8").tobytes())


def read_index(fh, corpus: Corpus) -> VectorIndex:
    if fh.read(len(INDEX_MAGIC)) != INDEX_MAGIC:
        raise DataError("not an index file (bad magic)")
    version = fh.read(1)
    if not version or version[0] != INDEX_VERSION:
        raise DataError(f"unsupported index version {version!r}")
    n = int.from_bytes(fh.read(4), "little")
    header = json.loads(fh.read(n).decode("utf-8"))
    ids, dim = header["ids"], header["dim"]
    data = fh.read()
    if len(data) != 8 * dim * len(ids):
        raise DataError("truncated index file")
    matrix = np.frombuffer(data, dtype="<f8").reshape(len(ids), dim).astype(np.float64)
    docs = [corpus.get(i) for i in ids]
    return VectorIndex(docs, matrix, header["embedder_id"], header["scope"])


_default_cache = IndexCache()


def retrieve_with_candidates(query: QueryItem, corpus: Corpus, scope: str, k_retrieve: int = 50,
                             k_context: int = 5, embedder: Embedder | None = None,
                             index_cache: IndexCache | None = None, query_text: str | None = None
                             ) -> tuple[list[RetrievedPassage], list[RetrievedPassage]]:
    """Like :func:`retrieve_for_query` but also returns the ``k_retrieve`` candidates."""
    embedder = embedder or ReferenceEmbedder()
    cache = index_cache or _default_cache
    langs = resolve_scope(scope, query.lang, corpus)
    index = cache.get(corpus, langs, embedder)
    if len(index) == 0:
        raise ScopeError(f"scope {scope} for {query.lang!r} has no indexable documents")
    text = query.question if query_text is None else query_text
    qvec = np.asarray(embedder.embed([text])[0], dtype=np.float64)
    candidates = search(index, qvec, k_retrieve)
    hits = rerank(text, candidates, k_context, embedder, vectors=index) if candidates else []
    if len(hits) < k_context:
        logger.info("query %s: only %d passages in scope %s", query.id, len(hits), scope)
    return candidates, hits


def retrieve_for_query(query: QueryItem, corpus: Corpus, scope: str, k_retrieve: int = 50,
                       k_context: int = 5, embedder: Embedder | None = None,
                       index_cache: IndexCache | None = None,
                       query_text: str | None = None) -> list[RetrievedPassage]:
    """Scope-restricted search for ``k_retrieve`` candidates, reranked to ``k_context``.

    ``query_text`` overrides the text used for retrieval (the translated
    question in tRAG). Fewer than ``k_context`` hits are returned as-is.
    """
    return retrieve_with_candidates(query, corpus, scope, k_retrieve, k_context, embedder,
                                    index_cache, query_text)[1]
