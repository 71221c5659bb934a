"""Command line entry point: ``mlrag {ingest,index,run,report,sweep}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 provider error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .corpus import REJECT, SKIP, ingest_corpus, load_queries
from .errors import DataError, MlragError
from .evaluation.langid import load_profiles
from .evaluation.report import (MIX_CONTEXT, MIX_RETRIEVE, ResourceRegistry, aggregate,
                                evaluate_result, read_records, write_records)
from .experiments import (BUNDLED_SPECS, config_from_mapping, dump_json, load_sweep_spec,
                          run_sweep)
from .pipeline import make_providers, run_queries
from .providers import ProviderClient, ResponseCache, load_endpoints
from .retrieval import IndexCache, ReferenceEmbedder

logger = logging.getLogger("mlrag")

EXIT_OK, EXIT_USAGE = 0, 1
CACHE_ENV = "MLRAG_CACHE_DIR"

# run options that may come from --config or flags; flags win
RUN_KEYS = ("strategy", "scope", "k_retrieve", "k_context", "embedder", "dim", "translator",
            "llm", "perturb", "seed", "answer_language", "trag_prompt_lang",
            "annotate_evidence_lang", "on_translation_error")
PATH_KEYS = ("corpus", "queries", "output", "dictionary", "translation_cache", "registry",
             "providers", "cache_dir")
OTHER_KEYS = ("mix_depth", "parallelism", "corpus_langs", "task")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit 2, which means data error here
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _KeyValueFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        msg = record.getMessage().replace('"', "'")
        return f'level={record.levelname.lower()} logger={record.name} msg="{msg}"'


def _setup_logging(level: str) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(_KeyValueFormatter())
    root = logging.getLogger("mlrag")
    root.handlers[:] = [handler]
    root.setLevel(level.upper())
    root.propagate = False


def read_flat_config(path: str | Path) -> dict[str, str]:
    """``key = value`` lines (``#`` comments). Relative paths resolve against
    the config file's directory."""
    path = Path(path)
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep key case
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        parser.read_string("[run]\n" + text, source=str(path))
    except configparser.Error as exc:
        raise DataError(f"config {path}: {exc.message.splitlines()[0]}") from None
    values = {k.replace("-", "_"): v.strip() for k, v in parser["run"].items()}
    unknown = set(values) - set(RUN_KEYS) - set(PATH_KEYS) - set(OTHER_KEYS)
    if unknown:
        raise DataError(f"config {path}: unknown keys {sorted(unknown)}")
    for key in PATH_KEYS:
        if key in values:
            values[key] = str((path.parent / values[key]).resolve())
    return values


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("common")
    g.add_argument("--offline", action="store_true", default=None,
                   help="serve provider calls from cache only; a miss fails")
    g.add_argument("--cache-dir", help=f"response and index cache (default ${CACHE_ENV} "
                                       "or <output>/cache)")
    g.add_argument("--providers", help="endpoint registry (JSON list of endpoints)")
    g.add_argument("--registry", help="high/low-resource registry file")
    g.add_argument("--log-level", default="warning",
                   choices=["debug", "info", "warning", "error"])


def _run_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run configuration (overrides --config)")
    g.add_argument("--config", help="flat key=value file")
    g.add_argument("--corpus")
    g.add_argument("--queries")
    g.add_argument("--output")
    g.add_argument("--dictionary", help="mock translator dictionary (JSON lines)")
    g.add_argument("--strategy", help="MONO | TRAG | MULTI | CROSS")
    g.add_argument("--scope", help="SL | EN | EN_PLUS_SL | ALL")
    g.add_argument("--k-retrieve", type=int)
    g.add_argument("--k-context", type=int)
    g.add_argument("--dim", type=int)
    g.add_argument("--embedder", help="reference | http:<endpoint>")
    g.add_argument("--translator", help="mock | http:<endpoint>")
    g.add_argument("--translation-cache", help="response cache directory for translations "
                                               "and other provider calls")
    g.add_argument("--llm", help="mock | http:<endpoint>")
    g.add_argument("--perturb", help="ORIGINAL | RANDOM_SHUFFLE | EN_FIRST | EN_LAST")
    g.add_argument("--seed", type=int)
    g.add_argument("--answer-language")
    g.add_argument("--trag-prompt-lang", choices=["sl", "en"])
    g.add_argument("--annotate-evidence-lang", action="store_true", default=None)
    g.add_argument("--on-translation-error", choices=["fail-run", "keep-original"])
    g.add_argument("--mix-depth", choices=[MIX_CONTEXT, MIX_RETRIEVE])
    g.add_argument("--parallelism", type=int)
    g.add_argument("--corpus-langs", help="comma-separated expected corpus languages")
    g.add_argument("--task", help="task name shown in reports")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mlrag", description="Multilingual RAG strategy runner.")
    parser.add_argument("--version", action="version", version=f"mlrag {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="validate a passage file and print statistics")
    p.add_argument("--corpus", required=True)
    p.add_argument("--corpus-langs")
    p.add_argument("--policy", choices=[REJECT, SKIP], default=REJECT)
    _common(p)

    p = sub.add_parser("index", help="embed a corpus and persist the index")
    p.add_argument("--corpus", required=True)
    p.add_argument("--corpus-langs")
    p.add_argument("--dim", type=int, default=512)
    _common(p)

    p = sub.add_parser("run", help="run one strategy configuration")
    _run_flags(p)
    _common(p)

    p = sub.add_parser("report", help="aggregate evaluation records into tables")
    p.add_argument("--records", required=True, nargs="+")
    p.add_argument("--baseline")
    p.add_argument("--task", default="")
    p.add_argument("--output", help="directory for report.csv and report.txt")
    p.add_argument("--format", choices=["text", "csv"], default="text")
    _common(p)

    p = sub.add_parser("sweep", help="run a sweep spec (JSON)")
    p.add_argument("--spec", required=True,
                   help="spec file, or a bundled name: " + ", ".join(sorted(BUNDLED_SPECS)))
    p.add_argument("--output", help="overrides the spec's output directory")
    p.add_argument("--parallelism", type=int)
    _common(p)
    return parser


def _client(args, output: Path | None, cache_override: str | None = None) -> ProviderClient:
    cache_dir = (cache_override or args.cache_dir or os.environ.get(CACHE_ENV)
                 or (output / "cache" if output else None))
    endpoints = load_endpoints(args.providers).values() if args.providers else ()
    return ProviderClient(cache=ResponseCache(cache_dir), offline=bool(args.offline),
                          endpoints=endpoints)


def _index_cache(args, output: Path | None) -> IndexCache:
    base = args.cache_dir or os.environ.get(CACHE_ENV) or (output / "cache" if output else None)
    return IndexCache(Path(base) / "index" if base else None)


def _registry(args) -> ResourceRegistry:
    return ResourceRegistry.from_file(args.registry) if args.registry else ResourceRegistry.default()


def _langs(value: str | None) -> list[str] | None:
    return [v.strip() for v in value.split(",") if v.strip()] if value else None


def cmd_ingest(args) -> int:
    corpus = ingest_corpus(args.corpus, _langs(args.corpus_langs), args.policy)
    stats = {"corpus": corpus.name, "documents": len(corpus),
             "languages": {lang: len(b) for lang, b in sorted(corpus.buckets.items())},
             "skipped": len(corpus.warnings), "fingerprint": corpus.fingerprint(),
             "text_chars": corpus.length_stats()}
    print(json.dumps(stats, sort_keys=True))
    return EXIT_OK


def cmd_index(args) -> int:
    corpus = ingest_corpus(args.corpus, _langs(args.corpus_langs))
    base = args.cache_dir or os.environ.get(CACHE_ENV)
    if not base:
        raise UsageError("index needs --cache-dir or $" + CACHE_ENV)
    cache = IndexCache(Path(base) / "index")
    index = cache.full_index(corpus, ReferenceEmbedder(args.dim))
    print(json.dumps({"corpus": corpus.name, "documents": len(index), "dim": args.dim,
                      "embedder": index.embedder_id, "cache_dir": str(cache.cache_dir)},
                     sort_keys=True))
    return EXIT_OK


def effective_run_config(args) -> dict[str, Any]:
    values: dict[str, Any] = read_flat_config(args.config) if args.config else {}
    for key in RUN_KEYS + PATH_KEYS + OTHER_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    for key in ("corpus", "queries", "output", "strategy"):
        if key not in values:
            raise UsageError(f"run needs --{key} (flag or config key)")
    return values


def cmd_run(args) -> int:
    values = effective_run_config(args)
    config = config_from_mapping({k: values[k] for k in RUN_KEYS if k in values})
    out = Path(values["output"])
    out.mkdir(parents=True, exist_ok=True)
    client = _client(args, out, values.get("translation_cache"))
    corpus = ingest_corpus(values["corpus"], _langs(values.get("corpus_langs")))
    queries = load_queries(values["queries"])
    by_id = {q.id: q for q in queries}
    mix_depth = values.get("mix_depth", MIX_CONTEXT)
    profiles = load_profiles()
    providers = make_providers(config, client, queries=queries,
                               dictionary=values.get("dictionary"),
                               index_cache=_index_cache(args, out))
    try:
        results = run_queries(config, queries, corpus, providers,
                              int(values.get("parallelism", 1)))
    finally:
        (out / "logs").mkdir(exist_ok=True)
        client.log.write_jsonl(out / "logs" / "calls.jsonl")
    records = [evaluate_result(r, by_id[r.query_id], config.label, profiles, mix_depth)
               for r in results]
    report = aggregate(records, _registry(args), task=values.get("task", ""))
    with (out / "results.jsonl").open("w", encoding="utf-8") as fh:
        for r in results:
            fh.write(dump_json(r.to_record()) + "\n")
    write_records(out / "records.jsonl", records)
    (out / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    (out / "report.txt").write_text(report.to_text(), encoding="utf-8")
    meta = {"label": config.label, "config": config.to_record(),
            "effective": {k: str(v) for k, v in sorted(values.items())},
            "corpus_fingerprint": corpus.fingerprint(), "queries": len(queries),
            "text_chars": corpus.length_stats(),
            "embedder": providers.embedder.embedder_id, "mix_depth": mix_depth}
    (out / "run.json").write_text(dump_json(meta) + "\n", encoding="utf-8")
    print(report.to_text(), end="")
    return EXIT_OK


def cmd_report(args) -> int:
    records = []
    for path in args.records:
        records.extend(read_records(path))
    report = aggregate(records, _registry(args), args.baseline, task=args.task)
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.csv").write_text(report.to_csv(), encoding="utf-8")
        (out / "report.txt").write_text(report.to_text(), encoding="utf-8")
    print(report.to_csv() if args.format == "csv" else report.to_text(), end="")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec_path = BUNDLED_SPECS.get(args.spec, args.spec)
    spec = load_sweep_spec(spec_path, args.output)
    if args.parallelism:
        spec.parallelism = args.parallelism
    if args.registry:
        spec.registry = Path(args.registry)
    client = _client(args, spec.output_dir)
    manifest = run_sweep(spec, client, _index_cache(args, spec.output_dir))
    for e in manifest.runs():
        acc = e.get("accuracy", {}).get("Avg")
        print(f"{e['label']:<28} {e['status']:<7} "
              + ("" if acc is None else f"Avg EM {acc:.1f}"))
    print(f"manifest: {manifest.path} ({manifest.status})")
    return EXIT_OK if manifest.status == "complete" else DataError.exit_code


COMMANDS = {"ingest": cmd_ingest, "index": cmd_index, "run": cmd_run, "report": cmd_report,
            "sweep": cmd_sweep}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"mlrag: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MlragError as exc:
        logger.error("%s", exc)
        return exc.exit_code
    except OSError as exc:
        logger.error("%s", exc)
        return DataError.exit_code


if __name__ == "__main__":
    sys.exit(main())
