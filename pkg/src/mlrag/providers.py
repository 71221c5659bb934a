"""Provider clients (embedding, translation, LLM) and their offline mocks.

Every provider invocation, mock or HTTP, goes through :class:`ProviderClient`,
which owns the response cache, the call log, retry/backoff and the offline
switch. Mocks run in-process and never touch the network.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import random
import re
import threading
import time
import unicodedata
import urllib.error
import urllib.request
from concurrent.futures import Future
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError, OfflineError, ProviderError

logger = logging.getLogger(__name__)

EMBED = "EMBED"
TRANSLATE = "TRANSLATE"
LLM = "LLM"
KINDS = (EMBED, TRANSLATE, LLM)

OK = "OK"
RETRIED_OK = "RETRIED_OK"
FAILED = "FAILED"

TRANSIENT_STATUS = frozenset({408, 429, 500, 502, 503, 504})

# greedy decoding settings sent to real LLM endpoints
LLM_TEMPERATURE = 0.0
LLM_MAX_TOKENS = 2048


@dataclass(frozen=True)
class ProviderEndpoint:
    id: str
    kind: str
    base_url: str
    auth_env_var: str = ""
    timeout: float = 30.0
    max_retries: int = 3
    backoff_base: float = 0.5
    max_concurrency: int = 4

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DataError(f"endpoint {self.id!r}: unknown kind {self.kind!r}")
        if self.max_retries < 0:
            raise DataError(f"endpoint {self.id!r}: max_retries must be >= 0")
        if self.timeout <= 0:
            raise DataError(f"endpoint {self.id!r}: timeout must be > 0")
        if self.max_concurrency < 1:
            raise DataError(f"endpoint {self.id!r}: max_concurrency must be >= 1")


def load_endpoints(path: str | Path) -> dict[str, ProviderEndpoint]:
    """Read an endpoint registry: a JSON list of endpoint objects."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read endpoint registry {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"endpoint registry {path}: {exc.msg}") from None
    if isinstance(raw, dict):
        raw = raw.get("endpoints", [])
    out: dict[str, ProviderEndpoint] = {}
    for rec in raw:
        try:
            ep = ProviderEndpoint(**rec)
        except TypeError as exc:
            raise DataError(f"endpoint registry {path}: {exc}") from None
        out[ep.id] = ep
    return out


@dataclass(frozen=True)
class CallLogEntry:
    endpoint_id: str
    request_hash: str
    cached: bool
    latency_ms: float
    outcome: str
    attempt: int = 1
    network: bool = False
    status: int | None = None


class CallLog:
    """Append-only, thread-safe record of provider attempts."""

    def __init__(self):
        self._entries: list[CallLogEntry] = []
        self._lock = threading.Lock()

    def append(self, entry: CallLogEntry) -> None:
        with self._lock:
            self._entries.append(entry)

    @property
    def entries(self) -> tuple[CallLogEntry, ...]:
        with self._lock:
            return tuple(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def network_entries(self) -> list[CallLogEntry]:
        return [e for e in self.entries if e.network]

    def invocations(self) -> list[CallLogEntry]:
        """Entries that reached a provider (not served from cache)."""
        return [e for e in self.entries if not e.cached]

    def write_jsonl(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            for e in self.entries:
                fh.write(json.dumps(asdict(e), sort_keys=True) + "\n")


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def request_hash(endpoint_id: str, payload: Any) -> str:
    return hashlib.sha256(f"{endpoint_id}\n{canonical_json(payload)}".encode("utf-8")).hexdigest()


class ResponseCache:
    """Content-addressed response store.

    On disk each response lives in ``<dir>/<h[:2]>/<h>.json``; writes go to a
    temp file and are renamed into place. Reads refresh the file mtime, and
    when the total size exceeds ``max_bytes`` the least recently used files
    are removed. With ``directory=None`` the cache is in memory only.
    """

    def __init__(self, directory: str | Path | None = None, max_bytes: int = 512 * 1024 * 1024):
        self.directory = Path(directory) if directory else None
        self.max_bytes = max_bytes
        self._mem: dict[str, Any] = {}
        self._lock = threading.Lock()
        self._size: int | None = None

    def _file(self, h: str) -> Path:
        assert self.directory is not None
        return self.directory / h[:2] / f"{h}.json"

    def get(self, h: str) -> Any | None:
        if self.directory is None:
            with self._lock:
                return self._mem.get(h)
        path = self._file(h)
        try:
            data = path.read_text(encoding="utf-8")
        except OSError:
            return None
        try:
            os.utime(path)
        except OSError:
            pass
        try:
            return json.loads(data)["response"]
        except (json.JSONDecodeError, KeyError):
            logger.warning("discarding corrupt cache entry %s", path)
            return None

    def put(self, h: str, response: Any) -> None:
        if self.directory is None:
            with self._lock:
                self._mem[h] = response
            return
        path = self._file(h)
        path.parent.mkdir(parents=True, exist_ok=True)
        body = json.dumps({"response": response}, ensure_ascii=False, sort_keys=True)
        tmp = path.with_name(f"{path.name}.{os.getpid()}.{threading.get_ident()}.tmp")
        tmp.write_text(body, encoding="utf-8")
        os.replace(tmp, path)
        with self._lock:
            if self._size is None:
                self._size = self._scan_size()
            else:
                self._size += len(body.encode("utf-8"))
            if self._size > self.max_bytes:
                self._evict()

    def _files(self) -> list[Path]:
        return [p for p in self.directory.glob("*/*.json")] if self.directory else []

    def _scan_size(self) -> int:
        return sum(p.stat().st_size for p in self._files())

    def _evict(self) -> None:
        files = sorted(self._files(), key=lambda p: (p.stat().st_mtime_ns, p.name))
        total = sum(p.stat().st_size for p in files)
        for p in files:
            if total <= self.max_bytes:
                break
            size = p.stat().st_size
            p.unlink(missing_ok=True)
            total -= size
        self._size = total

    def __len__(self) -> int:
        if self.directory is None:
            return len(self._mem)
        return len(self._files())


class TransientError(Exception):
    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


Transport = Callable[[str, bytes, Mapping[str, str], float], "tuple[int, bytes]"]


def urllib_transport(url: str, body: bytes, headers: Mapping[str, str],
                     timeout: float) -> tuple[int, bytes]:
    req = urllib.request.Request(url, data=body, headers=dict(headers), method="POST")
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            return resp.status, resp.read()
    except urllib.error.HTTPError as exc:
        return exc.code, exc.read() or b""
    except (urllib.error.URLError, TimeoutError, ConnectionError) as exc:
        raise TransientError(f"transport error: {exc}") from exc


@dataclass
class CallResult:
    payload: Any
    cached: bool
    request_hash: str
    outcome: str = OK


class ProviderClient:
    """Cache-first provider access with retry, backoff and call logging."""

    LOCAL_PREFIX = "mock:"

    def __init__(self, cache: ResponseCache | None = None, log: CallLog | None = None,
                 offline: bool = False, transport: Transport | None = None,
                 endpoints: Iterable[ProviderEndpoint] = (),
                 sleep: Callable[[float], None] = time.sleep, seed: int = 0,
                 use_cache: bool = True):
        self.cache = cache if cache is not None else ResponseCache()
        self.log = log if log is not None else CallLog()
        self.offline = offline
        self.transport = transport or urllib_transport
        self.endpoints: dict[str, ProviderEndpoint] = {}
        self.sleep = sleep
        self.use_cache = use_cache
        self._rng = random.Random(seed)
        self._rng_lock = threading.Lock()
        self._lock = threading.Lock()
        self._inflight: dict[str, Future] = {}
        self._semaphores: dict[str, threading.BoundedSemaphore] = {}
        self.backoff_history: list[float] = []
        for ep in endpoints:
            self.register(ep)

    def register(self, endpoint: ProviderEndpoint) -> None:
        self.endpoints[endpoint.id] = endpoint
        self._semaphores[endpoint.id] = threading.BoundedSemaphore(endpoint.max_concurrency)

    def endpoint(self, endpoint_id: str) -> ProviderEndpoint:
        try:
            return self.endpoints[endpoint_id]
        except KeyError:
            raise ProviderError(f"unregistered endpoint {endpoint_id!r}") from None

    def call(self, endpoint: ProviderEndpoint | str, payload: Any) -> Any:
        return self.call_detailed(endpoint, payload).payload

    def call_detailed(self, endpoint: ProviderEndpoint | str, payload: Any) -> CallResult:
        ep = self.endpoint(endpoint) if isinstance(endpoint, str) else endpoint
        if ep.id not in self.endpoints:
            self.register(ep)
        return self._cached(ep.id, payload, lambda h: self._http(ep, payload, h), network=True)

    def call_local(self, provider_id: str, payload: Any, fn: Callable[[], Any]) -> CallResult:
        """Run an in-process provider through the same cache and log."""
        return self._cached(self.LOCAL_PREFIX + provider_id, payload,
                            lambda h: (fn(), OK), network=False)

    def _cached(self, endpoint_id: str, payload: Any, compute, network: bool) -> CallResult:
        h = request_hash(endpoint_id, payload)
        t0 = time.perf_counter()
        if self.use_cache:
            hit = self.cache.get(h)
            if hit is not None:
                self.log.append(CallLogEntry(endpoint_id, h, True,
                                             (time.perf_counter() - t0) * 1000, OK))
                return CallResult(hit, True, h)
        with self._lock:
            fut = self._inflight.get(h)
            owner = fut is None
            if owner:
                fut = Future()
                self._inflight[h] = fut
        if not owner:
            payload_out = fut.result()
            self.log.append(CallLogEntry(endpoint_id, h, True,
                                         (time.perf_counter() - t0) * 1000, OK))
            return CallResult(payload_out, True, h)
        try:
            if network and self.offline:
                raise OfflineError(f"offline mode: cache miss for endpoint {endpoint_id!r} "
                                   f"(request {h[:12]})", request_hash=h)
            response, outcome = compute(h)
            if not network:
                self.log.append(CallLogEntry(endpoint_id, h, False,
                                             (time.perf_counter() - t0) * 1000, outcome))
            if self.use_cache:
                self.cache.put(h, response)
        except BaseException as exc:
            with self._lock:
                self._inflight.pop(h, None)
            fut.set_exception(exc)
            raise
        with self._lock:
            self._inflight.pop(h, None)
        fut.set_result(response)
        return CallResult(response, False, h, outcome)

    def backoff_delay(self, ep: ProviderEndpoint, attempt: int) -> float:
        """Exponential backoff with up to 50% jitter; non-decreasing in ``attempt``."""
        with self._rng_lock:
            jitter = self._rng.random() * 0.5
        return ep.backoff_base * (2 ** (attempt - 1)) * (1.0 + jitter)

    def _http(self, ep: ProviderEndpoint, payload: Any, h: str) -> tuple[Any, str]:
        headers = {"Content-Type": "application/json"}
        if ep.auth_env_var:
            secret = os.environ.get(ep.auth_env_var)
            if not secret:
                raise ProviderError(f"endpoint {ep.id!r}: environment variable "
                                    f"{ep.auth_env_var} is not set", request_hash=h)
            headers["Authorization"] = f"Bearer {secret}"
        body = canonical_json(payload).encode("utf-8")
        last_status: int | None = None
        last_error = ""
        attempts = ep.max_retries + 1
        with self._semaphores[ep.id]:
            for attempt in range(1, attempts + 1):
                t0 = time.perf_counter()
                try:
                    status, raw = self.transport(ep.base_url, body, headers, ep.timeout)
                except TransientError as exc:
                    status, raw, last_error = exc.status, b"", str(exc)
                latency = (time.perf_counter() - t0) * 1000
                last_status = status
                if status is not None and 200 <= status < 300:
                    try:
                        response = json.loads(raw.decode("utf-8"))
                    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                        self.log.append(CallLogEntry(ep.id, h, False, latency, FAILED,
                                                     attempt, True, status))
                        raise ProviderError(f"endpoint {ep.id!r}: invalid JSON response",
                                            request_hash=h, status=status) from exc
                    outcome = OK if attempt == 1 else RETRIED_OK
                    self.log.append(CallLogEntry(ep.id, h, False, latency, outcome,
                                                 attempt, True, status))
                    return response, outcome
                self.log.append(CallLogEntry(ep.id, h, False, latency, FAILED,
                                             attempt, True, status))
                transient = status is None or status in TRANSIENT_STATUS or status >= 500
                if not transient:
                    raise ProviderError(f"endpoint {ep.id!r}: HTTP {status} "
                                        f"(request {h[:12]})", request_hash=h, status=status)
                if attempt < attempts:
                    delay = self.backoff_delay(ep, attempt)
                    self.backoff_history.append(delay)
                    self.sleep(delay)
        detail = f"HTTP {last_status}" if last_status is not None else last_error
        raise ProviderError(f"endpoint {ep.id!r}: retries exhausted after {attempts} attempts, "
                            f"last {detail} (request {h[:12]})",
                            request_hash=h, status=last_status)


# --- translation providers -------------------------------------------------

def _nfc_trim(text: str) -> str:
    return unicodedata.normalize("NFC", text).strip()


def untranslated_tag(src: str, tgt: str) -> str:
    return f"⟦mt:{src}→{tgt}⟧"


class MockTranslator:
    """Exact-match sentence dictionary; misses come back tagged, untranslated."""

    provider_id = "mock"

    def __init__(self, records: Iterable[Mapping[str, str]] = ()):
        self._table: dict[tuple[str, str, str], str] = {}
        self._by_text: dict[tuple[str, str], tuple[str, str]] = {}
        self.calls: list[tuple[str, str, str]] = []
        self._calls_lock = threading.Lock()
        self._fingerprint: str | None = None
        for i, rec in enumerate(records, 1):
            try:
                src, tgt = rec["src_lang"], rec["tgt_lang"]
                s, t = _nfc_trim(rec["src_text"]), rec["tgt_text"]
            except (KeyError, TypeError, AttributeError):
                raise DataError(f"mock dictionary record {i}: expected keys "
                                "src_lang, tgt_lang, src_text, tgt_text") from None
            self._table[(src, tgt, s)] = t
            self._by_text.setdefault((tgt, s), (src, t))

    @classmethod
    def from_file(cls, path: str | Path) -> "MockTranslator":
        records = []
        try:
            lines = Path(path).read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise DataError(f"cannot read mock dictionary {path}: {exc.strerror}") from None
        for lineno, line in enumerate(lines, 1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: malformed dictionary record: {exc.msg}") from None
        return cls(records)

    def __len__(self) -> int:
        return len(self._table)

    @property
    def fingerprint(self) -> str:
        """Digest of the dictionary; part of every cache key for this mock."""
        if self._fingerprint is None:
            h = hashlib.sha256()
            for key, out in sorted(self._table.items()):
                h.update(canonical_json([*key, out]).encode("utf-8"))
            self._fingerprint = h.hexdigest()[:16]
        return self._fingerprint

    def translate(self, text: str, src: str, tgt: str) -> tuple[str, str]:
        with self._calls_lock:
            self.calls.append((text, src, tgt))
        key = _nfc_trim(text)
        if src == "auto":
            hit = self._by_text.get((tgt, key))
            if hit is not None:
                return hit[1], hit[0]
            return f"{untranslated_tag('auto', tgt)} {text}", "und"
        out = self._table.get((src, tgt, key))
        if out is None:
            return f"{untranslated_tag(src, tgt)} {text}", src
        return out, src


class HttpTranslator:
    """Adapter for a translation endpoint speaking the neutral JSON schema:
    request ``{"text", "src", "tgt"}``, response ``{"text", "detected_src"}``."""

    def __init__(self, client: ProviderClient, endpoint: ProviderEndpoint | str):
        self.client = client
        self.endpoint = client.endpoint(endpoint) if isinstance(endpoint, str) else endpoint
        self.provider_id = f"http:{self.endpoint.id}"

    def request(self, text: str, src: str, tgt: str) -> CallResult:
        res = self.client.call_detailed(self.endpoint, {"text": text, "src": src, "tgt": tgt})
        return res


# --- LLM providers -----------------------------------------------------------

_SENTENCE_SPLIT = re.compile(r"(?<=[.!?。！？])\s+|(?<=[。！？])|\n+")
_EVIDENCE_ITEM = re.compile(r"^\[(\d+)\]\s?", re.MULTILINE)


def split_sentences(text: str) -> list[str]:
    return [s.strip() for s in _SENTENCE_SPLIT.split(text) if s and s.strip()]


def prompt_sections(prompt: str) -> tuple[list[str], str]:
    """Recover (evidence texts, question) from a rendered RAG prompt."""
    from .pipeline import EVIDENCE_MARKER, QUESTION_MARKER

    ev_start = prompt.find(EVIDENCE_MARKER)
    q_start = prompt.find(QUESTION_MARKER)
    if ev_start < 0 or q_start < 0:
        raise ProviderError("prompt lacks evidence/question sections", stage="llm")
    evidence_block = prompt[ev_start + len(EVIDENCE_MARKER):q_start]
    question = prompt[q_start + len(QUESTION_MARKER):].strip()
    parts = _EVIDENCE_ITEM.split(evidence_block)
    # split() yields [preamble, n1, text1, n2, text2, ...]
    items = [parts[i + 1].strip() for i in range(1, len(parts) - 1, 2)]
    return items, question


class ExtractiveMockLLM:
    """Deterministic generator that answers from the evidence it is shown.

    It knows the gold answers of each question (the fixture) and returns
    ``"Answer: <sentence>"`` for a gold-bearing evidence sentence, or
    ``"Answer: unknown"``. Among several gold-bearing sentences it picks the
    smallest in normalized lexicographic order, so the output does not depend
    on evidence order.
    """

    llm_id = "mock-extractive"

    def __init__(self, golds_by_question: Mapping[str, Sequence[str]]):
        self.golds = {q.strip(): tuple(g) for q, g in golds_by_question.items()}
        for q, g in self.golds.items():
            if not g or not all(isinstance(x, str) for x in g):
                raise DataError(f"mock LLM fixture: question {q!r} needs string golds")
        self.fingerprint = hashlib.sha256(
            canonical_json(sorted(self.golds.items())).encode("utf-8")).hexdigest()[:16]

    def generate(self, prompt: str) -> str:
        from .evaluation.metrics import normalize

        evidence, question = prompt_sections(prompt)
        golds = [normalize(g) for g in self.golds.get(question, ())]
        golds = [g for g in golds if g]
        matches = []
        for item in evidence:
            for sent in split_sentences(item):
                ns = normalize(sent)
                if any(g in ns for g in golds):
                    matches.append((ns, sent))
        if not matches:
            return "Answer: unknown"
        return "Answer: " + min(matches)[1]


class HttpLLM:
    """Adapter for an LLM endpoint: request ``{"prompt", "temperature",
    "max_tokens"}``, response ``{"text"}``."""

    def __init__(self, client: ProviderClient, endpoint: ProviderEndpoint | str):
        self.client = client
        self.endpoint = client.endpoint(endpoint) if isinstance(endpoint, str) else endpoint
        self.llm_id = f"http:{self.endpoint.id}"

    def generate(self, prompt: str) -> str:
        resp = self.client.call(self.endpoint, {"prompt": prompt, "temperature": LLM_TEMPERATURE,
                                                "max_tokens": LLM_MAX_TOKENS})
        try:
            return str(resp["text"])
        except (KeyError, TypeError):
            raise ProviderError(f"{self.llm_id}: response lacks 'text'", stage="llm") from None


class CachedLLM:
    """Routes an in-process LLM through the client's cache and call log."""

    def __init__(self, inner, client: ProviderClient):
        self.inner = inner
        self.client = client
        self.llm_id = inner.llm_id

    def generate(self, prompt: str) -> str:
        if isinstance(self.inner, HttpLLM):
            return self.inner.generate(prompt)
        payload = {"prompt": prompt, "fixture": getattr(self.inner, "fingerprint", "")}
        res = self.client.call_local(self.llm_id, payload,
                                     lambda: {"text": self.inner.generate(prompt)})
        return res.payload["text"]


# --- embedding providers -----------------------------------------------------

class HttpEmbedder:
    """Adapter for an embedding endpoint: request ``{"texts", "dim"}``,
    response ``{"vectors"}``. Vectors are L2-normalized on receipt."""

    def __init__(self, client: ProviderClient, endpoint: ProviderEndpoint | str, dim: int):
        self.client = client
        self.endpoint = client.endpoint(endpoint) if isinstance(endpoint, str) else endpoint
        self.dim = dim
        self.embedder_id = f"http:{self.endpoint.id}-d{dim}"

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        resp = self.client.call(self.endpoint, {"texts": list(texts), "dim": self.dim})
        try:
            vecs = np.asarray(resp["vectors"], dtype=np.float64)
        except (KeyError, TypeError, ValueError):
            raise ProviderError(f"{self.embedder_id}: malformed response", stage="embed") from None
        if vecs.shape != (len(texts), self.dim):
            raise ProviderError(f"{self.embedder_id}: expected {(len(texts), self.dim)}, "
                                f"got {vecs.shape}", stage="embed")
        norms = np.linalg.norm(vecs, axis=1, keepdims=True)
        return np.divide(vecs, norms, out=np.zeros_like(vecs), where=norms > 0)


class CrossEncoderSlot:
    """Placeholder for a joint query-document scorer; no implementation ships."""

    def score(self, query: str, docs: Sequence[str]) -> list[float]:
        raise NotImplementedError("no cross-encoder provider is configured")


def register_mock(kind: str, fixture: Any = None):
    """Build a mock provider handle.

    TRANSLATE takes a dictionary file path or a list of records, LLM takes a
    question -> golds mapping (or a query file path), EMBED takes an optional
    ``{"dim": n}``.
    """
    if kind == EMBED:
        from .retrieval import ReferenceEmbedder

        dim = 512
        if isinstance(fixture, Mapping):
            dim = int(fixture.get("dim", dim))
        elif fixture is not None:
            raise DataError("EMBED mock takes no fixture (or {'dim': n})")
        return ReferenceEmbedder(dim)
    if kind == TRANSLATE:
        if isinstance(fixture, (str, Path)):
            return MockTranslator.from_file(fixture)
        if fixture is None:
            return MockTranslator()
        if not isinstance(fixture, (list, tuple)):
            raise DataError("TRANSLATE mock fixture must be a path or a list of records")
        return MockTranslator(fixture)
    if kind == LLM:
        if isinstance(fixture, (str, Path)):
            from .corpus import load_queries

            fixture = {q.question: q.golds for q in load_queries(fixture)}
        if not isinstance(fixture, Mapping):
            raise DataError("LLM mock fixture must map questions to gold answers")
        return ExtractiveMockLLM(fixture)
    raise DataError(f"unknown provider kind {kind!r}")
