import json

import pytest

from conftest import TINY_DICTIONARY, write_jsonl
from mlrag.cli import main, read_flat_config
from mlrag.errors import DataError
from mlrag.experiments import MINI_MKQA_DIR

CORPUS = str(MINI_MKQA_DIR / "corpus.jsonl")
QUERIES = str(MINI_MKQA_DIR / "queries.jsonl")
DICTIONARY = str(MINI_MKQA_DIR / "dictionary.jsonl")


def test_ingest_prints_stats(capsys):
    assert main(["ingest", "--corpus", CORPUS]) == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["documents"] == sum(stats["languages"].values())
    assert stats["languages"]["en"] > 0


def test_ingest_rejects_unexpected_language(capsys):
    assert main(["ingest", "--corpus", CORPUS, "--corpus-langs", "en,de"]) == 2
    assert main(["ingest", "--corpus", CORPUS, "--corpus-langs", "en,de",
                 "--policy", "skip"]) == 0


def test_index_persists(tmp_path, capsys, monkeypatch):
    assert main(["index", "--corpus", CORPUS, "--dim", "64", "--cache-dir", str(tmp_path)]) == 0
    assert list((tmp_path / "index").iterdir())
    monkeypatch.delenv("MLRAG_CACHE_DIR", raising=False)
    assert main(["index", "--corpus", CORPUS]) == 1


def test_run_with_config_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# MONO baseline\nstrategy = MONO\ncorpus = {CORPUS}\nqueries = {QUERIES}\n"
                   f"dictionary = {DICTIONARY}\noutput = out\nk_context = 5\n")
    assert main(["run", "--config", str(cfg), "--strategy", "CROSS", "--offline"]) == 0
    out = tmp_path / "out"
    meta = json.loads((out / "run.json").read_text())
    assert meta["config"]["strategy"] == "CROSS"
    assert meta["effective"]["output"] == str(out)
    assert len((out / "results.jsonl").read_text().splitlines()) == 120
    assert "flexible exact match" in capsys.readouterr().out
    assert (out / "logs" / "calls.jsonl").exists()


def test_report_subcommand(tmp_path, capsys):
    out = tmp_path / "run"
    for strategy in ("MONO", "MULTI"):
        assert main(["run", "--strategy", strategy, "--corpus", CORPUS, "--queries", QUERIES,
                     "--dictionary", DICTIONARY, "--output", str(out / strategy)]) == 0
    capsys.readouterr()
    assert main(["report", "--records", str(out / "MONO" / "records.jsonl"),
                 str(out / "MULTI" / "records.jsonl"), "--baseline", "MONO", "--format", "csv",
                 "--output", str(tmp_path / "rep")]) == 0
    text = capsys.readouterr().out
    assert text.startswith("table,strategy,metric")
    assert "delta,MULTI vs MONO,em" in text
    assert (tmp_path / "rep" / "report.txt").exists()


def test_sweep_bundled(tmp_path, capsys):
    assert main(["sweep", "--spec", "mini-mkqa", "--output", str(tmp_path), "--offline"]) == 0
    out = capsys.readouterr().out
    assert "CROSS" in out and "complete" in out


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["run", "--k-retrieve", "many"],
                                  ["run", "--strategy", "MONO"]])
def test_usage_errors_exit_1(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 1


def test_data_error_exit_2(tmp_path, capsys):
    assert main(["run", "--strategy", "MONO", "--corpus", str(tmp_path / "none.jsonl"),
                 "--queries", QUERIES, "--output", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert err.startswith("level=error")


def test_provider_error_exit_3(tmp_path, capsys):
    corpus = write_jsonl(tmp_path / "c.jsonl", [{"id": "d", "lang": "de", "text": "Paris ist da."}])
    queries = write_jsonl(tmp_path / "q.jsonl", [{"id": "1", "question": "Wo?", "lang": "de",
                                                  "golds": ["Paris"]}])
    eps = tmp_path / "eps.json"
    eps.write_text(json.dumps([{"id": "gpt", "kind": "LLM", "base_url": "http://127.0.0.1:9"}]))
    code = main(["run", "--strategy", "MONO", "--corpus", str(corpus), "--queries", str(queries),
                 "--output", str(tmp_path / "o"), "--llm", "http:gpt", "--providers", str(eps),
                 "--offline"])
    assert code == 3


def test_flat_config_parsing(tmp_path):
    cfg = tmp_path / "a.cfg"
    cfg.write_text("strategy = TRAG\ncorpus = data/c.jsonl\nk-retrieve = 20\n")
    values = read_flat_config(cfg)
    assert values["corpus"] == str(tmp_path / "data" / "c.jsonl")
    assert values["k_retrieve"] == "20"
    cfg.write_text("colour = blue\n")
    with pytest.raises(DataError, match="unknown keys"):
        read_flat_config(cfg)


def test_dictionary_fixture_file(tmp_path):
    path = write_jsonl(tmp_path / "d.jsonl", TINY_DICTIONARY)
    assert len(path.read_text().splitlines()) == len(TINY_DICTIONARY)
