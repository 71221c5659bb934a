"""Per-query evaluation records and their aggregation into report tables."""

from __future__ import annotations

import csv
import io
import json
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

from .. import langs
from ..errors import DataError
from .langid import LanguageProfiles, detect_language
from .metrics import char_3gram_recall, flexible_em

if TYPE_CHECKING:
    from ..corpus import QueryItem
    from ..pipeline import PipelineResult

HR = "HR"
LR = "LR"
ROLLUPS = ("Avg", HR, LR)
METRICS = ("em", "recall3", "lang_correct")
STRATEGY_ORDER = ("MONO", "TRAG", "MULTI", "CROSS")

MIX_CONTEXT = "context"
MIX_RETRIEVE = "retrieve"

NORMALIZATION_NOTE = ("answers normalized with NFKC, case folding, punctuation removal and "
                      "whitespace collapsing; no tokenization or article stripping")


def round1(x: float) -> float:
    """Round half away from zero to one decimal, never returning -0.0."""
    q = float(Decimal(repr(float(x))).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))
    return q + 0.0


def _fmt(x: float | None) -> str:
    return "-" if x is None else f"{x:.1f}"


def _fmt_delta(x: float | None) -> str:
    return "-" if x is None else f"{x:+.1f}"


@dataclass(frozen=True)
class EvalRecord:
    query_id: str
    strategy: str
    lang: str
    prediction: str
    em: int
    recall3: float
    pred_lang: str
    lang_correct: int
    retrieved_lang_histogram: Mapping[str, int] = field(default_factory=dict)
    parse_failed: bool = False

    def __post_init__(self):
        if self.em not in (0, 1) or self.lang_correct not in (0, 1):
            raise DataError(f"record {self.query_id}: em and lang_correct must be 0 or 1")
        if not 0.0 <= self.recall3 <= 1.0:
            raise DataError(f"record {self.query_id}: recall3 {self.recall3} outside [0, 1]")
        object.__setattr__(self, "retrieved_lang_histogram",
                           dict(sorted(self.retrieved_lang_histogram.items())))

    def to_record(self) -> dict:
        return asdict(self)

    @classmethod
    def from_record(cls, rec: Mapping) -> "EvalRecord":
        try:
            return cls(**rec)
        except TypeError as exc:
            raise DataError(f"malformed evaluation record: {exc}") from None


def write_records(path: str | Path, records: Iterable[EvalRecord]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r.to_record(), ensure_ascii=False, sort_keys=True) + "\n")


def read_records(path: str | Path) -> list[EvalRecord]:
    out = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read records {path}: {exc.strerror}") from None
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            out.append(EvalRecord.from_record(json.loads(line)))
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:{lineno}: {exc.msg}") from None
    return out


def evaluate_result(result: "PipelineResult", query: "QueryItem", strategy: str | None = None,
                    profiles: LanguageProfiles | None = None,
                    mix_depth: str = MIX_CONTEXT) -> EvalRecord:
    """Score one pipeline output against the query's gold answers.

    The language histogram counts the original language of each in-context
    passage (``mix_depth="context"``) or of every retrieved candidate
    (``"retrieve"``).
    """
    pred = result.parsed_answer
    if mix_depth == MIX_CONTEXT:
        hist = Counter(p.doc.lang for p in result.retrieved)
    elif mix_depth == MIX_RETRIEVE:
        hist = Counter(result.provenance.get("retrieval", {}).get("candidate_langs", {}))
    else:
        raise ValueError(f"unknown mix depth {mix_depth!r}")
    pred_lang = detect_language(pred, profiles)
    return EvalRecord(query_id=query.id, strategy=strategy or result.strategy, lang=query.lang,
                      prediction=pred, em=flexible_em(pred, query.golds),
                      recall3=char_3gram_recall(pred, query.golds), pred_lang=pred_lang,
                      lang_correct=int(pred_lang == query.lang),
                      retrieved_lang_histogram=dict(hist), parse_failed=result.parse_failed)


class ResourceRegistry:
    """Maps each evaluated language to HR or LR."""

    def __init__(self, mapping: Mapping[str, str]):
        bad = {k: v for k, v in mapping.items() if v not in (HR, LR)}
        if bad:
            raise DataError(f"resource classes must be HR or LR, got {bad}")
        self.mapping = dict(mapping)

    @classmethod
    def default(cls) -> "ResourceRegistry":
        return cls({code: HR if code in langs.HIGH_RESOURCE else LR
                    for code in langs.LANGUAGE_NAMES})

    @classmethod
    def from_file(cls, path: str | Path) -> "ResourceRegistry":
        """JSON object ``{"de": "HR", ...}`` or lines of ``code class``."""
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot read resource registry {path}: {exc.strerror}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError:
            data = {}
            for lineno, line in enumerate(text.splitlines(), 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                parts = line.replace(",", " ").split()
                if len(parts) != 2:
                    raise DataError(f"{path}:{lineno}: expected '<code> <HR|LR>'") from None
                data[parts[0]] = parts[1].upper()
        if not isinstance(data, dict):
            raise DataError(f"{path}: resource registry must map codes to HR/LR")
        return cls(data)

    def classify(self, lang: str) -> str:
        try:
            return self.mapping[lang]
        except KeyError:
            raise DataError(f"language {lang!r} is not in the HR/LR registry") from None


def _percentages(counts: Sequence[int]) -> tuple[float, ...]:
    """Largest-remainder rounding to 0.1 so the parts sum to exactly 100.0."""
    total = sum(counts)
    tenths = [c * 1000 / total for c in counts]
    floors = [int(t) for t in tenths]
    short = 1000 - sum(floors)
    order = sorted(range(len(counts)), key=lambda i: (-(tenths[i] - floors[i]), i))
    for i in order[:short]:
        floors[i] += 1
    return tuple(f / 10 for f in floors)


def language_mix(records: Iterable[EvalRecord], query_lang: str) -> tuple[float, float, float]:
    """(%En, %SL, %Others) over every retrieved passage of the records.

    For English queries all English passages count as %En.
    """
    en = sl = other = 0
    for r in records:
        if r.lang != query_lang:
            raise DataError(f"record {r.query_id} has language {r.lang}, expected {query_lang}")
        for lang, n in r.retrieved_lang_histogram.items():
            if lang == langs.PIVOT:
                en += n
            elif lang == query_lang:
                sl += n
            else:
                other += n
    if en + sl + other == 0:
        raise DataError(f"no retrieved passages for query language {query_lang!r}")
    return _percentages((en, sl, other))  # type: ignore[return-value]


def format_mix(mix: Sequence[float]) -> str:
    return " / ".join(f"{x:.1f}%" for x in mix)


def strategy_sort_key(label: str) -> tuple:
    base = label.split("@")[0].split("+")[0].split("#")[0]
    rank = STRATEGY_ORDER.index(base) if base in STRATEGY_ORDER else len(STRATEGY_ORDER)
    return (rank, label)


def _mean(xs: Sequence[float]) -> float:
    return sum(xs) / len(xs)


@dataclass
class Report:
    """Aggregated tables. Per-language values are percentages; rollups and
    deltas are rounded to one decimal."""

    languages: tuple[str, ...]
    strategies: tuple[str, ...]
    registry: ResourceRegistry
    per_language: dict[str, dict[str, dict[str, float]]]
    counts: dict[str, dict[str, int]]
    rollups: dict[str, dict[str, dict[str, float | None]]]
    mix: dict[str, dict[str, tuple[float, float, float]]]
    baseline: str | None = None
    task: str = ""

    def value(self, strategy: str, key: str, metric: str = "em") -> float | None:
        if key in ROLLUPS:
            return self.rollups[metric][strategy][key]
        v = self.per_language[metric][strategy].get(key)
        return None if v is None else round1(v)

    def delta(self, strategy: str, baseline: str | None = None, key: str = "Avg",
              metric: str = "em") -> float | None:
        baseline = baseline or self.baseline
        if baseline is None:
            raise ValueError("no baseline strategy given")
        a, b = self.value(strategy, key, metric), self.value(baseline, key, metric)
        if a is None or b is None:
            return None
        return round1(a - b)

    def delta_table(self, baseline: str | None = None,
                    metric: str = "em") -> dict[str, dict[str, float | None]]:
        baseline = baseline or self.baseline
        if baseline not in self.strategies:
            raise DataError(f"baseline {baseline!r} not among strategies {list(self.strategies)}")
        keys = list(self.languages) + list(ROLLUPS)
        return {s: {k: self.delta(s, baseline, k, metric) for k in keys}
                for s in self.strategies if s != baseline}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = list(self.languages) + list(ROLLUPS)
        w.writerow(["table", "strategy", "metric"] + cols)
        for metric in METRICS:
            for s in self.strategies:
                w.writerow(["score", s, metric] + [_fmt(self.value(s, k, metric)) for k in cols])
        if self.baseline is not None:
            for metric in METRICS:
                for s, row in self.delta_table(metric=metric).items():
                    w.writerow(["delta", f"{s} vs {self.baseline}", metric]
                               + [_fmt_delta(row[k]) for k in cols])
        for s in self.strategies:
            w.writerow(["mix", s, "en/sl/others"]
                       + [format_mix(self.mix[s][k]) if k in self.mix[s] else "-" for k in cols])
        w.writerow(["count", "", "queries"]
                   + [str(max(self.counts[s].get(k, 0) for s in self.strategies))
                      if k in self.languages else "-" for k in cols])
        return buf.getvalue()

    def to_text(self) -> str:
        cols = list(self.languages) + list(ROLLUPS)
        width = max([8] + [len(s) for s in self.strategies]) + 2
        lines = [f"# task: {self.task or '-'}",
                 f"# {NORMALIZATION_NOTE}",
                 "# resource classes: " + ", ".join(
                     f"{lang}={self.registry.classify(lang)}" for lang in self.languages)]

        def table(title, rows):
            lines.append("")
            lines.append(title)
            lines.append("".ljust(width) + "".join(c.rjust(8) for c in cols))
            for label, cells in rows:
                lines.append(label.ljust(width) + "".join(c.rjust(8) for c in cells))

        names = {"em": "flexible exact match (%)", "recall3": "character 3-gram recall (%)",
                 "lang_correct": "answers in the query language (%)"}
        for metric in METRICS:
            table(names[metric], [(s, [_fmt(self.value(s, k, metric)) for k in cols])
                                  for s in self.strategies])
        if self.baseline is not None:
            table(f"delta vs {self.baseline}, exact match",
                  [(s, [_fmt_delta(row[k]) for k in cols])
                   for s, row in self.delta_table().items()])
        lines.append("")
        lines.append("retrieved language mix (%En / %SL / %Others)")
        for s in self.strategies:
            for lang in self.languages:
                if lang in self.mix[s]:
                    lines.append(f"{s.ljust(width)}{langs.language_name(lang):<12}"
                                 f"{format_mix(self.mix[s][lang])}")
        return "\n".join(lines) + "\n"


def aggregate(records: Iterable[EvalRecord], registry: ResourceRegistry | None = None,
              baseline_strategy: str | None = None, task: str = "") -> Report:
    """Per-language means, unweighted Avg/HR/LR rollups and the mix table."""
    registry = registry or ResourceRegistry.default()
    grouped: dict[str, dict[str, list[EvalRecord]]] = defaultdict(lambda: defaultdict(list))
    for r in records:
        registry.classify(r.lang)
        grouped[r.strategy][r.lang].append(r)
    if not grouped:
        raise DataError("no evaluation records to aggregate")
    strategies = tuple(sorted(grouped, key=strategy_sort_key))
    languages = tuple(sorted({lang for g in grouped.values() for lang in g}))
    if baseline_strategy is not None and baseline_strategy not in grouped:
        raise DataError(f"baseline {baseline_strategy!r} not among strategies {list(strategies)}")

    per_language: dict[str, dict[str, dict[str, float]]] = {m: {} for m in METRICS}
    rollups: dict[str, dict[str, dict[str, float | None]]] = {m: {} for m in METRICS}
    counts: dict[str, dict[str, int]] = {}
    mix: dict[str, dict[str, tuple[float, float, float]]] = {}
    for s in strategies:
        by_lang = grouped[s]
        counts[s] = {lang: len(rs) for lang, rs in sorted(by_lang.items())}
        for metric in METRICS:
            table = {lang: 100.0 * _mean([float(getattr(r, metric)) for r in rs])
                     for lang, rs in sorted(by_lang.items())}
            per_language[metric][s] = table
            hr = [v for lang, v in table.items() if registry.classify(lang) == HR]
            lr = [v for lang, v in table.items() if registry.classify(lang) == LR]
            rollups[metric][s] = {
                "Avg": round1(_mean(list(table.values()))),
                HR: round1(_mean(hr)) if hr else None,
                LR: round1(_mean(lr)) if lr else None,
            }
        mix[s] = {}
        for lang, rs in sorted(by_lang.items()):
            try:
                mix[s][lang] = language_mix(rs, lang)
            except DataError:
                pass
    return Report(languages, strategies, registry, per_language, counts, rollups, mix,
                  baseline_strategy, task)
