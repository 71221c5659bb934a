import json
import xml.etree.ElementTree as ET

import pytest

from mlrag.errors import DataError
from mlrag.experiments import (MINI_MKQA_DIR, Manifest, SweepSpec, compare, config_from_mapping,
                               load_sweep_spec, report_from_scores, run_sweep)
from mlrag.pipeline import StrategyConfig
from mlrag.providers import ProviderClient


def small_spec(out, configs, seeds=(0,)):
    return SweepSpec(configs=configs, queries=MINI_MKQA_DIR / "queries.jsonl",
                     corpus=MINI_MKQA_DIR / "corpus.jsonl", output_dir=out, seeds=list(seeds),
                     dictionary=MINI_MKQA_DIR / "dictionary.jsonl", name="mini", baseline="MONO")


def test_config_from_mapping():
    cfg = config_from_mapping({"strategy": "multi", "scope": "en+sl", "k_context": "3",
                               "embedder": "reference", "annotate_evidence_lang": "yes"})
    assert (cfg.strategy, cfg.scope, cfg.k_context, cfg.annotate_evidence_lang) == \
        ("MULTI", "EN_PLUS_SL", 3, True)
    with pytest.raises(DataError):
        config_from_mapping({"scope": "ALL"})
    with pytest.raises(DataError):
        config_from_mapping({"strategy": "MONO", "dim": "big"})


def test_load_spec_resolves_paths(tmp_path):
    spec = load_sweep_spec(MINI_MKQA_DIR / "sweep.json", tmp_path / "o")
    assert spec.corpus == MINI_MKQA_DIR / "corpus.jsonl"
    assert [c.label for c in spec.configs] == ["MONO", "TRAG", "MULTI", "MULTI@en_plus_sl",
                                               "CROSS"]
    bad = tmp_path / "bad.json"
    bad.write_text('{"configs": []')
    with pytest.raises(DataError):
        load_sweep_spec(bad)
    bad.write_text(json.dumps({"corpus": "c", "queries": "q", "configs": [{"strategy": "MONO"}]}))
    with pytest.raises(DataError, match="output"):
        load_sweep_spec(bad)


def test_spec_validation(tmp_path):
    with pytest.raises(DataError):
        small_spec(tmp_path, [])
    with pytest.raises(DataError):
        small_spec(tmp_path, [StrategyConfig("MONO")], seeds=(1, 1))


def test_sweep_outputs_and_manifest(tmp_path):
    spec = small_spec(tmp_path, [StrategyConfig("MONO"), StrategyConfig("MULTI")], seeds=(0, 1))
    manifest = run_sweep(spec, ProviderClient(offline=True))
    assert manifest.status == "complete"
    labels = [e["label"] for e in manifest.runs()]
    assert labels == ["MONO#s0", "MONO#s1", "MULTI#s0", "MULTI#s1"]
    assert manifest.verify() == []
    for e in manifest.runs():
        assert {o["path"].rsplit("/", 1)[1] for o in e["outputs"]} == {
            "results.jsonl", "records.jsonl", "report.csv", "report.txt", "run.json"}
    summary = manifest.entries[-1]
    assert summary["kind"] == "summary" and summary["baseline"] == "MONO#s0"
    assert (tmp_path / "logs" / "calls.jsonl").exists()
    assert "logs/" not in (tmp_path / "manifest.jsonl").read_text()
    again = Manifest.read(tmp_path / "manifest.jsonl")
    assert again.entries == manifest.entries


def test_failing_config_gives_partial_manifest(tmp_path):
    spec = small_spec(tmp_path, [StrategyConfig("MONO"), StrategyConfig("MULTI", llm_id="http:nope")])
    manifest = run_sweep(spec, ProviderClient(offline=True))
    assert manifest.status == "partial"
    failed = [e for e in manifest.runs() if e["status"] == "failed"]
    assert len(failed) == 1 and "nope" in failed[0]["error"]


def test_manifest_detects_tampering(tmp_path):
    manifest = run_sweep(small_spec(tmp_path, [StrategyConfig("MONO")]),
                         ProviderClient(offline=True))
    target = tmp_path / manifest.runs()[0]["outputs"][0]["path"]
    target.write_text("changed\n")
    assert manifest.verify() == [manifest.runs()[0]["outputs"][0]["path"]]


def test_compare_published_delta(tmp_path):
    report = report_from_scores({"MULTI": {"de": 55.0, "zh": 51.2},
                                 "CROSS": {"de": 60.0, "zh": 54.4}}, task="MKQA")
    comp = compare([report], "MULTI", tmp_path)
    assert report.value("CROSS", "Avg") == 57.2 and report.value("MULTI", "Avg") == 53.1
    assert comp.deltas["MKQA"]["CROSS"]["Avg"] == 4.1
    assert "MKQA,CROSS,MULTI,+4.1,+4.1,-" in comp.table_path.read_text()
    svg = ET.parse(comp.plots[0]).getroot()
    labels = [t.text for t in svg.iter("{http://www.w3.org/2000/svg}text")]
    assert "+4.1" in labels


def test_compare_rejects_mismatched_languages():
    a = report_from_scores({"MONO": {"de": 1.0}, "MULTI": {"de": 2.0}}, task="a")
    b = report_from_scores({"MONO": {"ko": 1.0}, "MULTI": {"ko": 2.0}}, task="b")
    with pytest.raises(DataError, match="different languages"):
        compare([a, b], "MONO")
    with pytest.raises(DataError, match="baseline"):
        compare([a], "CROSS")
    with pytest.raises(DataError):
        compare([], "MONO")


def test_compare_multiple_tasks():
    a = report_from_scores({"MONO": {"de": 10.0}, "MULTI": {"de": 12.5}}, task="a")
    b = report_from_scores({"MONO": {"de": 20.0}, "MULTI": {"de": 19.0}}, task="b")
    comp = compare([a, b], "MONO")
    assert comp.deltas["a"]["MULTI"]["Avg"] == 2.5
    assert comp.deltas["b"]["MULTI"]["Avg"] == -1.0
    assert comp.to_csv().splitlines()[0] == "task,strategy,baseline,Avg,HR,LR"
