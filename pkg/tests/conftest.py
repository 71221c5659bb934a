import json
from pathlib import Path

import pytest

from mlrag.corpus import Corpus, Document, QueryItem, ingest_corpus, load_queries
from mlrag.experiments import MINI_MKQA_DIR
from mlrag.pipeline import StrategyConfig
from mlrag.providers import ProviderClient

FIXTURES = Path(__file__).parent / "fixtures"

# filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def mini_corpus():
    return ingest_corpus(MINI_MKQA_DIR / "corpus.jsonl")


@pytest.fixture(scope="session")
def mini_queries():
    return load_queries(MINI_MKQA_DIR / "queries.jsonl")


@pytest.fixture(scope="session")
def mini_dictionary():
    return MINI_MKQA_DIR / "dictionary.jsonl"


@pytest.fixture
def client():
    return ProviderClient(offline=True)


MINI_CONFIGS = {
    "MONO": StrategyConfig("MONO"),
    "TRAG": StrategyConfig("TRAG"),
    "MULTI": StrategyConfig("MULTI"),
    "MULTI@en_plus_sl": StrategyConfig("MULTI", scope="EN_PLUS_SL"),
    "CROSS": StrategyConfig("CROSS"),
}


def tiny_corpus() -> Corpus:
    docs = [
        Document("de-1", "de", "Der Eiffelturm steht in Paris.", "Eiffelturm"),
        Document("de-2", "de", "Berlin ist die Hauptstadt von Deutschland.", "Berlin"),
        Document("en-1", "en", "The Eiffel Tower is in Paris.", "Eiffel Tower"),
        Document("en-2", "en", "Berlin is the capital of Germany.", "Berlin"),
        Document("en-3", "en", "Mount Fuji is the highest mountain in Japan.", "Fuji"),
        Document("ko-1", "ko", "에펠탑은 파리에 있다.", "에펠탑"),
        Document("fr-1", "fr", "La tour Eiffel se trouve à Paris.", "Tour Eiffel"),
    ]
    return Corpus("tiny", {"de", "en", "ko", "fr"}, docs)


def tiny_queries() -> list[QueryItem]:
    return [QueryItem("q1", "Wo steht der Eiffelturm?", "de", ("Paris",), "HR"),
            QueryItem("q2", "에펠탑은 어디에 있나요?", "ko", ("파리", "Paris"), "LR")]


TINY_DICTIONARY = [
    {"src_lang": "de", "tgt_lang": "en", "src_text": "Wo steht der Eiffelturm?",
     "tgt_text": "Where is the Eiffel Tower?"},
    {"src_lang": "ko", "tgt_lang": "en", "src_text": "에펠탑은 어디에 있나요?",
     "tgt_text": "Where is the Eiffel Tower?"},
    {"src_lang": "de", "tgt_lang": "en", "src_text": "Eiffelturm\nDer Eiffelturm steht in Paris.",
     "tgt_text": "Eiffel Tower\nThe Eiffel Tower stands in Paris."},
]


def write_jsonl(path: Path, rows) -> Path:
    path.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows),
                    encoding="utf-8")
    return path
