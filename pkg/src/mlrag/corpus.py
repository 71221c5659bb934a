"""Passage collections partitioned by language, plus the query-set loader."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from . import langs
from .errors import DataError

logger = logging.getLogger(__name__)

REJECT = "reject"
SKIP = "skip"


@dataclass(frozen=True)
class Document:
    id: str
    lang: str
    text: str
    title: str = ""
    source: str = ""

    @property
    def evidence_text(self) -> str:
        """Title and body as shown to the model (and sent to translation)."""
        if self.title:
            return f"{self.title}\n{self.text}"
        return self.text

    def to_record(self) -> dict:
        return {"id": self.id, "lang": self.lang, "title": self.title,
                "text": self.text, "source": self.source}


class Corpus:
    """Immutable document collection with one bucket per language.

    ``restrict`` returns another ``Corpus`` sharing the same ``Document``
    objects, so views are cheap.
    """

    def __init__(self, name: str, languages: Iterable[str], documents: Iterable[Document],
                 warnings: Iterable[str] = ()):
        self.name = name
        self.languages = frozenset(languages)
        docs = tuple(documents)
        buckets: dict[str, list[Document]] = {lang: [] for lang in self.languages}
        seen: set[str] = set()
        for doc in docs:
            if doc.id in seen:
                raise DataError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)
            if doc.lang not in buckets:
                raise DataError(f"document {doc.id!r} has language {doc.lang!r} "
                                f"outside corpus languages {sorted(self.languages)}")
            buckets[doc.lang].append(doc)
        self.documents = docs
        self._buckets = {k: tuple(v) for k, v in buckets.items()}
        self._by_id = {d.id: d for d in docs}
        self.warnings = tuple(warnings)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._by_id

    def get(self, doc_id: str) -> Document:
        return self._by_id[doc_id]

    def bucket(self, lang: str) -> tuple[Document, ...]:
        return self._buckets.get(lang, ())

    @property
    def buckets(self) -> dict[str, tuple[Document, ...]]:
        return dict(self._buckets)

    def restrict(self, langs_: Iterable[str]) -> "Corpus":
        return restrict(self, langs_)

    def length_stats(self) -> dict[str, dict[str, float]]:
        """Per-language character counts of the evidence text (no length cap is applied)."""
        out = {}
        for lang, docs in sorted(self._buckets.items()):
            sizes = [len(d.evidence_text) for d in docs]
            out[lang] = ({"min": min(sizes), "mean": round(sum(sizes) / len(sizes), 1),
                          "max": max(sizes)} if sizes else {"min": 0, "mean": 0.0, "max": 0})
        return out

    def fingerprint(self) -> str:
        """Content hash over every document record, order-sensitive."""
        import hashlib

        h = hashlib.sha256(self.name.encode("utf-8"))
        for doc in self.documents:
            h.update(json.dumps(doc.to_record(), ensure_ascii=False, sort_keys=True).encode("utf-8"))
            h.update(b"\n")
        return h.hexdigest()

    def __repr__(self) -> str:
        sizes = {k: len(v) for k, v in sorted(self._buckets.items())}
        return f"Corpus({self.name!r}, {sizes})"


def restrict(corpus: Corpus, langs_: Iterable[str]) -> Corpus:
    wanted = frozenset(langs_)
    unknown = wanted - corpus.languages
    if unknown:
        raise DataError(f"unknown language code(s) for corpus {corpus.name!r}: "
                        f"{', '.join(sorted(unknown))}")
    docs = [d for d in corpus.documents if d.lang in wanted]
    return Corpus(corpus.name, wanted, docs)


def _parse_document(line: str, lineno: int, path: Path) -> Document:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}:{lineno}: malformed record: {exc.msg}") from None
    if not isinstance(rec, dict):
        raise DataError(f"{path}:{lineno}: malformed record: expected a JSON object")
    for key in ("id", "lang", "text"):
        if not isinstance(rec.get(key), str):
            raise DataError(f"{path}:{lineno}: malformed record: missing string field {key!r}")
    if not rec["text"].strip():
        raise DataError(f"{path}:{lineno}: document {rec['id']!r} has empty text")
    return Document(id=rec["id"], lang=rec["lang"], text=rec["text"],
                    title=str(rec.get("title") or ""), source=str(rec.get("source") or ""))


def ingest_corpus(path: str | Path, expected_langs: Iterable[str] | None = None,
                  policy: str = REJECT, name: str | None = None) -> Corpus:
    """Read a JSON-lines passage file into a :class:`Corpus`.

    Documents whose language is outside ``expected_langs`` (or outside the
    language registry when no set is given) either abort ingestion
    (``policy="reject"``) or are dropped with a warning (``policy="skip"``).
    """
    if policy not in (REJECT, SKIP):
        raise ValueError(f"unknown out-of-scope policy {policy!r}")
    path = Path(path)
    allowed = frozenset(expected_langs) if expected_langs is not None else None
    if allowed is not None:
        for code in allowed:
            langs.check_code(code)
    try:
        fh = path.open(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read corpus file {path}: {exc.strerror}") from None

    docs: list[Document] = []
    warnings: list[str] = []
    seen: dict[str, int] = {}
    with fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            doc = _parse_document(line, lineno, path)
            ok = langs.is_registered(doc.lang) and (allowed is None or doc.lang in allowed)
            if not ok:
                msg = f"{path}:{lineno}: document {doc.id!r} has unexpected language {doc.lang!r}"
                if policy == REJECT:
                    raise DataError(msg)
                logger.warning(msg)
                warnings.append(msg)
                continue
            if doc.id in seen:
                raise DataError(f"{path}:{lineno}: duplicate document id {doc.id!r} "
                                f"(first seen on line {seen[doc.id]})")
            seen[doc.id] = lineno
            docs.append(doc)

    languages = allowed if allowed is not None else {d.lang for d in docs}
    return Corpus(name or path.stem, languages, docs, warnings)


@dataclass(frozen=True)
class QueryItem:
    id: str
    question: str
    lang: str
    golds: tuple[str, ...]
    resource: str = ""
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if not self.golds:
            raise DataError(f"query {self.id!r} has no gold answers")


def load_queries(path: str | Path) -> list[QueryItem]:
    """Read queries from JSON lines with keys id, question, lang, golds."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read query file {path}: {exc.strerror}") from None
    items: list[QueryItem] = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            golds = rec["golds"]
            if isinstance(golds, str):
                golds = [golds]
            item = QueryItem(id=str(rec["id"]), question=rec["question"], lang=rec["lang"],
                             golds=tuple(golds), resource=rec.get("resource", ""),
                             meta={k: v for k, v in rec.items()
                                   if k not in {"id", "question", "lang", "golds", "resource"}})
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DataError(f"{path}:{lineno}: malformed query record ({exc})") from None
        if item.id in seen:
            raise DataError(f"{path}:{lineno}: duplicate query id {item.id!r}")
        seen.add(item.id)
        items.append(item)
    return items
