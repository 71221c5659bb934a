"""Sweep runner (strategies x scopes x perturbations x seeds) and
strategy comparison with delta tables and SVG bar charts."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping, Sequence
from xml.sax.saxutils import escape

from .corpus import ingest_corpus, load_queries
from .errors import DataError, MlragError
from .evaluation.report import (MIX_CONTEXT, ROLLUPS, Report, ResourceRegistry, aggregate,
                                evaluate_result, round1, strategy_sort_key, write_records)
from .pipeline import StrategyConfig, make_providers, run_queries
from .providers import ProviderClient
from .retrieval import IndexCache

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.jsonl"
MINI_MKQA_DIR = Path(__file__).resolve().parent / "data" / "mini_mkqa"
BUNDLED_SPECS = {"mini-mkqa": MINI_MKQA_DIR / "sweep.json"}

CONFIG_KEYS = {
    "strategy": "strategy", "scope": "scope", "k_retrieve": "k_retrieve",
    "k_context": "k_context", "embedder": "embedder_id", "dim": "dim",
    "translator": "translator_id", "llm": "llm_id", "perturb": "perturb", "seed": "seed",
    "answer_language": "answer_language", "trag_prompt_lang": "trag_prompt_lang",
    "annotate_evidence_lang": "annotate_evidence_lang",
    "on_translation_error": "on_translation_error",
}
_INT_FIELDS = {"k_retrieve", "k_context", "dim", "seed"}


def config_from_mapping(values: Mapping[str, Any]) -> StrategyConfig:
    """Build a StrategyConfig from user-facing keys (``embedder``, ``llm``...)."""
    kwargs: dict[str, Any] = {}
    for key, value in values.items():
        name = CONFIG_KEYS.get(key, key if key in CONFIG_KEYS.values() else None)
        if name is None:
            continue
        if name in _INT_FIELDS:
            try:
                value = int(value)
            except (TypeError, ValueError):
                raise DataError(f"config key {key!r} must be an integer, got {value!r}") from None
        elif name == "annotate_evidence_lang" and isinstance(value, str):
            value = value.strip().lower() in ("1", "true", "yes", "on")
        kwargs[name] = value
    if "strategy" not in kwargs:
        raise DataError("config lacks a strategy")
    try:
        return StrategyConfig(**kwargs)
    except TypeError as exc:
        raise DataError(f"bad config: {exc}") from None


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def dump_json(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True)


def slug(label: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", label.lower()).strip("-")


@dataclass
class SweepSpec:
    configs: list[StrategyConfig]
    queries: Path
    corpus: Path
    output_dir: Path
    seeds: list[int] = field(default_factory=lambda: [0])
    dictionary: Path | None = None
    name: str = "sweep"
    baseline: str | None = None
    corpus_langs: list[str] | None = None
    parallelism: int = 1
    mix_depth: str = MIX_CONTEXT
    registry: Path | None = None

    def __post_init__(self):
        if not self.configs:
            raise DataError("sweep spec needs at least one config")
        if not self.seeds:
            raise DataError("sweep spec needs at least one seed")
        if len(set(self.seeds)) != len(self.seeds):
            raise DataError("sweep seeds must be distinct")


def load_sweep_spec(path: str | Path, output_dir: str | Path | None = None) -> SweepSpec:
    """Read a JSON sweep spec.

    Input paths (corpus, queries, dictionary, registry) are relative to the
    spec file; ``output`` is relative to the working directory. Each entry of
    ``configs`` is merged over ``defaults``.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read sweep spec {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"sweep spec {path}: {exc.msg} (line {exc.lineno})") from None
    base = path.parent

    def rel(key: str, required: bool = True) -> Path | None:
        value = raw.get(key)
        if value is None:
            if required:
                raise DataError(f"sweep spec {path} lacks {key!r}")
            return None
        return (base / value).resolve()

    defaults = raw.get("defaults", {})
    configs = [config_from_mapping({**defaults, **c}) for c in raw.get("configs", [])]
    out = output_dir or raw.get("output")
    if out is None:
        raise DataError(f"sweep spec {path} lacks 'output' (or pass --output)")
    return SweepSpec(configs=configs, queries=rel("queries"), corpus=rel("corpus"),
                     output_dir=Path(out), seeds=[int(s) for s in raw.get("seeds", [0])],
                     dictionary=rel("dictionary", False), name=raw.get("name", path.stem),
                     baseline=raw.get("baseline"), corpus_langs=raw.get("corpus_langs"),
                     parallelism=int(raw.get("parallelism", 1)),
                     mix_depth=raw.get("mix_depth", MIX_CONTEXT), registry=rel("registry", False))


@dataclass
class Manifest:
    path: Path
    entries: list[dict]

    @property
    def status(self) -> str:
        return self.entries[0]["status"]

    def runs(self) -> list[dict]:
        return [e for e in self.entries if e["kind"] == "run"]

    def verify(self) -> list[str]:
        """Listed outputs that are missing or whose hash changed."""
        bad = []
        root = self.path.parent
        for e in self.entries:
            for out in e.get("outputs", []):
                p = root / out["path"]
                if not p.exists() or sha256_file(p) != out["sha256"]:
                    bad.append(out["path"])
        return bad

    @classmethod
    def read(cls, path: str | Path) -> "Manifest":
        path = Path(path)
        lines = path.read_text(encoding="utf-8").splitlines()
        return cls(path, [json.loads(line) for line in lines if line.strip()])


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _output_entry(root: Path, path: Path) -> dict:
    return {"path": path.relative_to(root).as_posix(), "sha256": sha256_file(path),
            "bytes": path.stat().st_size}


def run_sweep(spec: SweepSpec, client: ProviderClient | None = None,
              index_cache: IndexCache | None = None) -> Manifest:
    """Run every config x seed, persist records and reports, and write a manifest.

    A failing config is recorded with status ``failed`` and the sweep goes on;
    the manifest header then reads ``partial``. Call logs and timings go to
    ``logs/`` and are not part of the manifest.
    """
    client = client or ProviderClient()
    index_cache = index_cache or IndexCache()
    out = spec.output_dir
    out.mkdir(parents=True, exist_ok=True)
    registry = (ResourceRegistry.from_file(spec.registry) if spec.registry
                else ResourceRegistry.default())
    corpus = ingest_corpus(spec.corpus, spec.corpus_langs)
    queries = load_queries(spec.queries)
    by_id = {q.id: q for q in queries}

    entries: list[dict] = []
    all_records = []
    timings: list[dict] = []
    multi_seed = len(spec.seeds) > 1
    for base_cfg in spec.configs:
        for seed in spec.seeds:
            cfg = replace(base_cfg, seed=seed)
            label = cfg.label + (f"#s{seed}" if multi_seed else "")
            run_dir = out / "runs" / slug(label)
            entry: dict[str, Any] = {"kind": "run", "label": label, "seed": seed,
                                     "config": cfg.to_record()}
            try:
                providers = make_providers(cfg, client, queries=queries,
                                           dictionary=spec.dictionary, index_cache=index_cache)
                results = run_queries(cfg, queries, corpus, providers, spec.parallelism)
                records = [evaluate_result(r, by_id[r.query_id], label, mix_depth=spec.mix_depth)
                           for r in results]
                report = aggregate(records, registry, task=spec.name)
            except MlragError as exc:
                logger.error("run %s failed: %s", label, exc)
                entry.update(status="failed", error=str(exc),
                             stage=getattr(exc, "stage", "") or "")
                entries.append(entry)
                continue
            run_dir.mkdir(parents=True, exist_ok=True)
            _write(run_dir / "results.jsonl",
                   "".join(dump_json(r.to_record()) + "\n" for r in results))
            write_records(run_dir / "records.jsonl", records)
            _write(run_dir / "report.csv", report.to_csv())
            _write(run_dir / "report.txt", report.to_text())
            _write(run_dir / "run.json", dump_json({
                "label": label, "task": spec.name, "config": cfg.to_record(),
                "corpus_fingerprint": corpus.fingerprint(), "queries": len(queries),
                "text_chars": corpus.length_stats(),
                "embedder": providers.embedder.embedder_id, "mix_depth": spec.mix_depth,
                "document_translation_unit": "title+text"}) + "\n")
            timings.extend({"label": label, "query_id": r.query_id,
                            **r.provenance.get("timings", {})} for r in results)
            all_records.extend(records)
            entry.update(status="ok",
                         accuracy={k: report.rollups["em"][label][k] for k in ROLLUPS},
                         outputs=[_output_entry(out, run_dir / n) for n in
                                  ("results.jsonl", "records.jsonl", "report.csv",
                                   "report.txt", "run.json")])
            entries.append(entry)

    summary: dict[str, Any] = {"kind": "summary", "outputs": []}
    if all_records:
        labels = sorted({r.strategy for r in all_records}, key=strategy_sort_key)
        baseline = spec.baseline if spec.baseline in labels else labels[0]
        report = aggregate(all_records, registry, baseline, task=spec.name)
        sdir = out / "summary"
        _write(sdir / "report.csv", report.to_csv())
        _write(sdir / "report.txt", report.to_text())
        comparison = compare([report], baseline, sdir)
        paths = [sdir / "report.csv", sdir / "report.txt", comparison.table_path,
                 *comparison.plots]
        summary.update(baseline=baseline, outputs=[_output_entry(out, p) for p in paths])

    failed = sum(1 for e in entries if e["status"] != "ok")
    header = {"kind": "sweep", "name": spec.name, "status": "partial" if failed else "complete",
              "runs": len(entries), "failed": failed, "seeds": spec.seeds,
              "corpus_fingerprint": corpus.fingerprint(), "queries": len(queries)}
    manifest = Manifest(out / MANIFEST_NAME, [header, *entries, summary])
    _write(manifest.path, "".join(dump_json(e) + "\n" for e in manifest.entries))

    logs = out / "logs"
    logs.mkdir(exist_ok=True)
    client.log.write_jsonl(logs / "calls.jsonl")
    _write(logs / "timings.jsonl", "".join(dump_json(t) + "\n" for t in timings))
    return manifest


@dataclass
class Comparison:
    baseline: str
    deltas: dict[str, dict[str, dict[str, float | None]]]  # task -> strategy -> rollup
    table_path: Path | None = None
    plots: list[Path] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["task", "strategy", "baseline", *ROLLUPS])
        for task, rows in self.deltas.items():
            for s, row in rows.items():
                w.writerow([task, s, self.baseline]
                           + ["-" if row[k] is None else f"{row[k]:+.1f}" for k in ROLLUPS])
        return buf.getvalue()


def compare(reports: Sequence[Report], baseline: str, out_dir: str | Path | None = None,
            metric: str = "em") -> Comparison:
    """Rollup deltas of every strategy against ``baseline``, per report (task).

    With ``out_dir`` a ``deltas.csv`` and one SVG bar chart per task are
    written under it (charts in ``plots/``).
    """
    if not reports:
        raise DataError("nothing to compare")
    langs0 = set(reports[0].languages)
    for r in reports[1:]:
        if set(r.languages) != langs0:
            raise DataError(f"reports cover different languages: {sorted(langs0)} vs "
                            f"{sorted(r.languages)}")
    deltas: dict[str, dict[str, dict[str, float | None]]] = {}
    for i, r in enumerate(reports):
        if baseline not in r.strategies:
            raise DataError(f"baseline {baseline!r} missing from report {r.task or i}")
        task = r.task or f"task{i + 1}"
        if task in deltas:
            task = f"{task}-{i + 1}"
        deltas[task] = {s: {k: r.delta(s, baseline, k, metric) for k in ROLLUPS}
                        for s in r.strategies if s != baseline}
    comp = Comparison(baseline, deltas)
    if out_dir is not None:
        out = Path(out_dir)
        comp.table_path = out / "deltas.csv"
        _write(comp.table_path, comp.to_csv())
        for task, r in zip(deltas, reports):
            path = out / "plots" / f"{slug(task) or 'task'}.svg"
            _write(path, bar_chart_svg(r, baseline, task, metric))
            comp.plots.append(path)
    return comp


PALETTE = ("#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1",
           "#ff9da7")


def bar_chart_svg(report: Report, baseline: str, title: str, metric: str = "em") -> str:
    """Grouped bars (Avg / HR / LR) per strategy; each non-baseline bar is
    labelled with its difference to the baseline."""
    groups = [k for k in ROLLUPS
              if any(report.rollups[metric][s][k] is not None for s in report.strategies)]
    strategies = list(report.strategies)
    bar_w, gap, pad_l, pad_b, height = 28, 26, 50, 60, 260
    group_w = bar_w * len(strategies) + gap
    width = pad_l + group_w * len(groups) + 20
    total_h = height + pad_b + 40
    top = 40

    def y(v: float) -> float:
        return top + height * (1 - v / 100.0)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{total_h}" '
           f'viewBox="0 0 {width} {total_h}" font-family="sans-serif" font-size="11">',
           f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="14">'
           f'{escape(title)} ({escape(metric)})</text>']
    for tick in range(0, 101, 20):
        out.append(f'<line x1="{pad_l}" x2="{width - 10}" y1="{y(tick):.1f}" y2="{y(tick):.1f}" '
                   f'stroke="#ddd"/>')
        out.append(f'<text x="{pad_l - 6}" y="{y(tick) + 4:.1f}" text-anchor="end">{tick}</text>')
    for gi, g in enumerate(groups):
        gx = pad_l + gi * group_w + gap / 2
        for si, s in enumerate(strategies):
            v = report.rollups[metric][s][g]
            if v is None:
                continue
            x = gx + si * bar_w
            color = PALETTE[si % len(PALETTE)]
            out.append(f'<rect x="{x:.1f}" y="{y(v):.1f}" width="{bar_w - 4}" '
                       f'height="{top + height - y(v):.1f}" fill="{color}">'
                       f'<title>{escape(s)} {g}: {v:.1f}</title></rect>')
            label = f"{v:.1f}" if s == baseline else f"{report.delta(s, baseline, g, metric):+.1f}"
            out.append(f'<text x="{x + (bar_w - 4) / 2:.1f}" y="{y(v) - 4:.1f}" '
                       f'text-anchor="middle" font-size="9">{label}</text>')
        out.append(f'<text x="{gx + (group_w - gap) / 2:.1f}" y="{top + height + 16}" '
                   f'text-anchor="middle" font-size="12">{g}</text>')
    for si, s in enumerate(strategies):
        lx = pad_l + si * 110
        ly = top + height + 36
        out.append(f'<rect x="{lx}" y="{ly - 9}" width="10" height="10" '
                   f'fill="{PALETTE[si % len(PALETTE)]}"/>')
        out.append(f'<text x="{lx + 14}" y="{ly}">{escape(s)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def report_from_scores(scores: Mapping[str, Mapping[str, float]],
                       registry: ResourceRegistry | None = None, baseline: str | None = None,
                       task: str = "") -> Report:
    """Report from per-language percentages, e.g. to compare published numbers."""
    from .evaluation.report import HR, LR, METRICS

    registry = registry or ResourceRegistry.default()
    strategies = tuple(sorted(scores, key=strategy_sort_key))
    languages = tuple(sorted({lang for s in scores.values() for lang in s}))
    per_language = {m: {} for m in METRICS}
    rollups: dict[str, dict[str, dict[str, float | None]]] = {m: {} for m in METRICS}
    for s in strategies:
        table = {lang: float(v) for lang, v in sorted(scores[s].items())}
        hr = [v for lang, v in table.items() if registry.classify(lang) == HR]
        lr = [v for lang, v in table.items() if registry.classify(lang) == LR]
        roll = {"Avg": round1(sum(table.values()) / len(table)),
                HR: round1(sum(hr) / len(hr)) if hr else None,
                LR: round1(sum(lr) / len(lr)) if lr else None}
        for m in METRICS:
            per_language[m][s] = dict(table) if m == "em" else {}
            rollups[m][s] = roll if m == "em" else {k: None for k in ROLLUPS}
    return Report(languages, strategies, registry, per_language,
                  {s: {} for s in strategies}, rollups, {s: {} for s in strategies},
                  baseline, task)
