"""Strategy orchestration: retrieval scope, optional query/document
translation, prompt rendering, generation and answer parsing."""

from __future__ import annotations

import logging
import random
import re
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from . import langs
from .corpus import Corpus, QueryItem
from .errors import DataError, ProviderError
from .providers import (CachedLLM, ExtractiveMockLLM, HttpEmbedder, HttpLLM, HttpTranslator,
                        MockTranslator, ProviderClient)
from .retrieval import (ALL, EN, EN_PLUS_SL, SL, Embedder, IndexCache, ReferenceEmbedder,
                        RetrievedPassage, parse_scope, retrieve_with_candidates)
from .translation import FAIL_RUN, KEEP_ORIGINAL, Translator, translate_documents, translate_text

logger = logging.getLogger(__name__)

MONO = "MONO"
TRAG = "TRAG"
MULTI = "MULTI"
CROSS = "CROSS"
STRATEGIES = (MONO, TRAG, MULTI, CROSS)

ORIGINAL = "ORIGINAL"
RANDOM_SHUFFLE = "RANDOM_SHUFFLE"
EN_FIRST = "EN_FIRST"
EN_LAST = "EN_LAST"
PERTURB_MODES = (ORIGINAL, RANDOM_SHUFFLE, EN_FIRST, EN_LAST)

QUERY_LANGUAGE = "query-language"

HEADER = "Please answer the question by following the provided instructions."
INSTRUCTIONS_MARKER = "#Instructions:"
EVIDENCE_MARKER = "#Reference Evidence:"
QUESTION_MARKER = "#Question:"
MARKERS = (INSTRUCTIONS_MARKER, EVIDENCE_MARKER, QUESTION_MARKER)
INSTRUCTION = ("Answer the question as clearly as possible using the provided reference "
               "evidence and follow the format 'Answer:'.")

_DEFAULT_SCOPE = {MONO: SL, TRAG: EN, MULTI: ALL, CROSS: ALL}
_ALLOWED_SCOPES = {MONO: {SL}, TRAG: {EN}, MULTI: {EN_PLUS_SL, ALL}, CROSS: {EN_PLUS_SL, ALL}}


def parse_strategy(value: str) -> str:
    v = value.strip().upper()
    if v.endswith("RAG") and v != "TRAG":
        v = v[:-3]
    try:
        return {"MONO": MONO, "TRAG": TRAG, "MULTI": MULTI, "CROSS": CROSS}[v]
    except KeyError:
        raise ValueError(f"unknown strategy {value!r}; expected one of "
                         "mono, trag, multi, cross") from None


def parse_perturb(value: str) -> str:
    v = value.strip().upper().replace("-", "_")
    if v not in PERTURB_MODES:
        raise ValueError(f"unknown perturbation {value!r}; expected one of "
                         "original, random_shuffle, en_first, en_last")
    return v


@dataclass(frozen=True)
class StrategyConfig:
    """One pipeline run. ``scope`` defaults per strategy (MONO: SL, TRAG: EN,
    MULTI/CROSS: ALL)."""

    strategy: str
    scope: str = ""
    k_retrieve: int = 50
    k_context: int = 5
    embedder_id: str = "reference"
    dim: int = 512
    translator_id: str = "mock"
    llm_id: str = "mock"
    perturb: str = ORIGINAL
    seed: int = 0
    answer_language: str = QUERY_LANGUAGE
    trag_prompt_lang: str = "sl"
    annotate_evidence_lang: bool = False
    on_translation_error: str = FAIL_RUN

    def __post_init__(self):
        try:
            strategy = parse_strategy(self.strategy)
            scope = parse_scope(self.scope) if self.scope else _DEFAULT_SCOPE[strategy]
            perturb = parse_perturb(self.perturb)
        except ValueError as exc:
            raise DataError(str(exc)) from None
        object.__setattr__(self, "strategy", strategy)
        object.__setattr__(self, "scope", scope)
        object.__setattr__(self, "perturb", perturb)
        if scope not in _ALLOWED_SCOPES[strategy]:
            allowed = ", ".join(sorted(_ALLOWED_SCOPES[strategy]))
            raise DataError(f"strategy {strategy} requires scope in {{{allowed}}}, got {scope}")
        if self.k_retrieve < 1 or self.k_context < 1:
            raise DataError("k_retrieve and k_context must be positive")
        if self.k_context > self.k_retrieve:
            raise DataError(f"k_context ({self.k_context}) exceeds k_retrieve ({self.k_retrieve})")
        if not 0 <= self.seed < 2 ** 64:
            raise DataError("seed must be an unsigned 64-bit integer")
        if self.trag_prompt_lang not in ("sl", "en"):
            raise DataError("trag_prompt_lang must be 'sl' or 'en'")
        if self.answer_language != QUERY_LANGUAGE and not langs.is_registered(self.answer_language):
            raise DataError(f"unknown answer language {self.answer_language!r}")
        if self.on_translation_error not in (FAIL_RUN, KEEP_ORIGINAL):
            raise DataError(f"unknown translation failure policy {self.on_translation_error!r}")

    @property
    def label(self) -> str:
        """Short run label: the strategy, plus any non-default scope or perturbation."""
        label = self.strategy
        if self.scope != _DEFAULT_SCOPE[self.strategy]:
            label += "@" + self.scope.lower()
        if self.perturb != ORIGINAL:
            label += "+" + self.perturb.lower()
        return label

    def to_record(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Prompt:
    instructions: str
    evidence: tuple[tuple[int, str, str], ...]
    question: str
    answer_language: str
    annotate_languages: bool = False

    def render(self) -> str:
        """Byte-deterministic prompt text. Each section marker occurs exactly
        once; marker look-alikes inside evidence or the question are escaped."""
        lines = [HEADER, INSTRUCTIONS_MARKER, self.instructions, EVIDENCE_MARKER]
        for i, (_, lang, text) in enumerate(self.evidence, 1):
            tag = f"({lang}) " if self.annotate_languages else ""
            lines.append(f"[{i}] {tag}{_guard(text)}")
        lines.append(f"{QUESTION_MARKER} {_guard(self.question)}")
        return "\n".join(lines)


_ITEM_START = re.compile(r"^\[(\d+)\]", re.MULTILINE)


def _guard(text: str) -> str:
    for marker in MARKERS:
        text = text.replace(marker, "＃" + marker[1:])
    # a body line starting with "[n]" would read as a new evidence item
    return _ITEM_START.sub(lambda m: "［" + m.group(1) + "］", text)


def answer_directive(answer_language: str) -> str:
    return f"Write the final answer in {langs.language_name(answer_language)}."


def build_prompt(question: str, evidence: Sequence[RetrievedPassage], answer_language: str,
                 annotate_languages: bool = False) -> Prompt:
    items = tuple((p.rank, p.lang, p.text) for p in evidence)
    return Prompt(f"{INSTRUCTION} {answer_directive(answer_language)}", items, question,
                  answer_language, annotate_languages)


def shuffle_rng(seed: int, query_id: str) -> random.Random:
    """Per-query generator so shuffles do not depend on execution order."""
    return random.Random(f"{seed}:{query_id}")


def perturb_order(passages: Sequence[RetrievedPassage], mode: str,
                  seed: int | random.Random = 0) -> list[RetrievedPassage]:
    """Reorder in-context passages; the set of passages never changes."""
    items = list(passages)
    if mode == ORIGINAL:
        return items
    if mode == RANDOM_SHUFFLE:
        rng = seed if isinstance(seed, random.Random) else random.Random(seed)
        for i in range(len(items) - 1, 0, -1):
            j = rng.randrange(i + 1)
            items[i], items[j] = items[j], items[i]
        return items
    if mode in (EN_FIRST, EN_LAST):
        en = [p for p in items if p.lang == langs.PIVOT]
        rest = [p for p in items if p.lang != langs.PIVOT]
        return en + rest if mode == EN_FIRST else rest + en
    raise ValueError(f"unknown perturbation mode {mode!r}")


# Checked case-insensitively; the last occurrence in the output wins.
ANSWER_MARKERS: list[str] = [r"the answer is\s*[:：]", r"answer\s*[:：]", r"答案是\s*[:：]?",
                             r"정답은"]


def register_answer_marker(pattern: str) -> None:
    re.compile(pattern)
    ANSWER_MARKERS.append(pattern)


def parse_answer(raw_output: str) -> tuple[str, bool]:
    """Text after the last answer marker, and whether no marker was found."""
    best: re.Match | None = None
    for pattern in ANSWER_MARKERS:
        for m in re.finditer(pattern, raw_output, re.IGNORECASE):
            if best is None or (m.start(), m.end()) > (best.start(), best.end()):
                best = m
    if best is None:
        return raw_output.strip(), True
    return raw_output[best.end():].strip(), False


# run-dependent provenance fields, excluded from persisted records
VOLATILE_KEYS = frozenset({"timings", "cached", "cache_hits", "translation_cached"})


def stable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: stable(v) for k, v in obj.items() if k not in VOLATILE_KEYS}
    if isinstance(obj, list):
        return [stable(v) for v in obj]
    return obj


@dataclass
class PipelineResult:
    query_id: str
    strategy: str
    prompt: Prompt
    raw_output: str
    parsed_answer: str
    retrieved: list[RetrievedPassage]
    provenance: dict[str, Any] = field(default_factory=dict)
    parse_failed: bool = False
    label: str = ""

    def to_record(self) -> dict:
        """Deterministic summary: timings and cache-hit flags are left out."""
        return stable({"query_id": self.query_id, "strategy": self.strategy,
                       "label": self.label or self.strategy,
                       "prompt": self.prompt.render(), "raw_output": self.raw_output,
                       "parsed_answer": self.parsed_answer, "parse_failed": self.parse_failed,
                       "retrieved": [p.to_record() for p in self.retrieved],
                       "provenance": self.provenance})


@dataclass
class Providers:
    """The provider handles a run needs, all bound to one client."""

    embedder: Embedder
    translator: Translator
    llm: Any
    client: ProviderClient
    index_cache: IndexCache = field(default_factory=IndexCache)


def _stage(stage: str, exc: ProviderError) -> ProviderError:
    if not exc.stage:
        exc.stage = stage
    return exc


def run_strategy(config: StrategyConfig, query: QueryItem, corpus: Corpus,
                 providers: Providers) -> PipelineResult:
    if not langs.is_registered(query.lang):
        raise DataError(f"query {query.id!r} has unregistered language {query.lang!r}")
    prov: dict[str, Any] = {"timings": {}}
    timings = prov["timings"]
    answer_lang = query.lang if config.answer_language == QUERY_LANGUAGE else config.answer_language
    retrieval_text = query.question
    prompt_question = query.question

    if config.strategy == TRAG:
        t0 = time.perf_counter()
        try:
            res = translate_text(query.question, query.lang, langs.PIVOT, providers.translator)
        except ProviderError as exc:
            raise _stage("query-translation", exc)
        timings["query_translation_ms"] = (time.perf_counter() - t0) * 1000
        retrieval_text = res.text
        prov["query_translation"] = {"text": res.text, "src": query.lang, "tgt": langs.PIVOT,
                                     "cached": res.cached}
        if config.trag_prompt_lang == "en":
            prompt_question = res.text

    t0 = time.perf_counter()
    try:
        candidates, hits = retrieve_with_candidates(
            query, corpus, config.scope, config.k_retrieve, config.k_context,
            providers.embedder, providers.index_cache, query_text=retrieval_text)
    except ProviderError as exc:
        raise _stage("retrieval", exc)
    timings["retrieval_ms"] = (time.perf_counter() - t0) * 1000
    prov["retrieval"] = {"scope": config.scope, "k_retrieve": config.k_retrieve,
                         "k_context": config.k_context, "n_candidates": len(candidates),
                         "candidate_langs": dict(sorted(Counter(p.lang for p in candidates)
                                                        .items())),
                         "short": len(hits) < config.k_context, "empty": not hits}

    rng = shuffle_rng(config.seed, query.id)
    evidence = perturb_order(hits, config.perturb, rng)
    prov["perturb"] = {"mode": config.perturb, "seed": config.seed,
                       "order": [p.doc.id for p in evidence]}

    if config.strategy == CROSS and evidence:
        t0 = time.perf_counter()
        try:
            evidence = translate_documents(evidence, langs.PIVOT, providers.translator,
                                           config.on_translation_error)
        except ProviderError as exc:
            raise _stage("document-translation", exc)
        timings["document_translation_ms"] = (time.perf_counter() - t0) * 1000
        prov["document_translation"] = {
            "translated": sum(1 for p in evidence if p.provenance.get("translated")),
            "cache_hits": sum(1 for p in evidence if p.provenance.get("translation_cached")),
            "failed": [p.doc.id for p in evidence if "translation_failed" in p.provenance],
            "unit": "title+text",
        }

    prompt = build_prompt(prompt_question, evidence, answer_lang, config.annotate_evidence_lang)
    t0 = time.perf_counter()
    try:
        raw = providers.llm.generate(prompt.render())
    except ProviderError as exc:
        raise _stage("generation", exc)
    timings["generation_ms"] = (time.perf_counter() - t0) * 1000
    answer, failed = parse_answer(raw)
    return PipelineResult(query.id, config.strategy, prompt, raw, answer, list(evidence), prov,
                          failed, config.label)


def run_queries(config: StrategyConfig, queries: Sequence[QueryItem], corpus: Corpus,
                providers: Providers, parallelism: int = 1) -> list[PipelineResult]:
    """Run every query; results are ordered by query id."""
    ordered = sorted(queries, key=lambda q: q.id)
    if parallelism <= 1:
        return [run_strategy(config, q, corpus, providers) for q in ordered]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(lambda q: run_strategy(config, q, corpus, providers), ordered))


def _http_id(spec: str) -> str | None:
    return spec[len("http:"):] if spec.startswith("http:") else None


def make_providers(config: StrategyConfig, client: ProviderClient, *,
                   queries: Iterable[QueryItem] = (),
                   dictionary: str | Path | Sequence[Mapping[str, str]] | None = None,
                   index_cache: IndexCache | None = None) -> Providers:
    """Resolve ``reference|http:<id>``, ``mock|http:<id>`` provider specs.

    The mock LLM learns the gold answers of ``queries``; questions whose
    English rendering is in the dictionary are registered under that text too.
    """
    ep = _http_id(config.embedder_id)
    if ep is not None:
        embedder: Embedder = HttpEmbedder(client, ep, config.dim)
    elif config.embedder_id == "reference":
        embedder = ReferenceEmbedder(config.dim)
    else:
        raise DataError(f"unknown embedder {config.embedder_id!r}")

    ep = _http_id(config.translator_id)
    if ep is not None:
        translator = Translator(HttpTranslator(client, ep), client)
        mock_tr = None
    elif config.translator_id == "mock":
        if isinstance(dictionary, (str, Path)):
            mock_tr = MockTranslator.from_file(dictionary)
        else:
            mock_tr = MockTranslator(dictionary or ())
        translator = Translator(mock_tr, client)
    else:
        raise DataError(f"unknown translator {config.translator_id!r}")

    ep = _http_id(config.llm_id)
    if ep is not None:
        llm: Any = HttpLLM(client, ep)
    elif config.llm_id in ("mock", ExtractiveMockLLM.llm_id):
        golds: dict[str, tuple[str, ...]] = {}
        for q in queries:
            golds[q.question] = q.golds
            if mock_tr is not None and q.lang != langs.PIVOT:
                text, _ = mock_tr.translate(q.question, q.lang, langs.PIVOT)
                golds.setdefault(text, q.golds)
        if mock_tr is not None:
            mock_tr.calls.clear()
        llm = CachedLLM(ExtractiveMockLLM(golds), client)
    else:
        raise DataError(f"unknown LLM provider {config.llm_id!r}")
    return Providers(embedder, translator, llm, client, index_cache or IndexCache())

