import pytest
from hypothesis import given, strategies as st

from metric_table import CASES
from mlrag.evaluation.metrics import char_3gram_recall, char_ngrams, flexible_em, normalize

texts = st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=40)
golds = st.lists(st.text(min_size=1, max_size=12), min_size=1, max_size=3)


@pytest.mark.parametrize("pred,gold,em,recall", CASES, ids=[str(i) for i in range(len(CASES))])
def test_hand_computed_table(pred, gold, em, recall):
    assert flexible_em(pred, gold) == em
    assert char_3gram_recall(pred, gold) == pytest.approx(float(recall), abs=1e-9)


def test_table_size():
    assert len(CASES) == 50


def test_normalize_examples():
    assert normalize("  Hello,   World! ") == "hello world"
    assert normalize("ＡＢＣ") == "abc"
    assert normalize("「北京」") == "北京"


def test_empty_golds_rejected():
    with pytest.raises(ValueError):
        flexible_em("x", [])
    with pytest.raises(ValueError):
        char_3gram_recall("x", [])


def test_char_ngrams():
    assert char_ngrams("abcd") == ["abc", "bcd"]
    assert char_ngrams("ab") == []


@given(texts)
def test_normalize_idempotent(text):
    assert normalize(normalize(text)) == normalize(text)


@given(texts, golds)
def test_ranges(pred, gs):
    assert flexible_em(pred, gs) in (0, 1)
    assert 0.0 <= char_3gram_recall(pred, gs) <= 1.0


@given(texts, golds)
def test_exact_match_implies_full_recall(pred, gs):
    if flexible_em(pred, gs):
        assert char_3gram_recall(pred, gs) == 1.0


@given(texts, st.text(min_size=1, max_size=12), texts)
def test_embedded_gold_matches(left, gold, right):
    if normalize(gold):
        assert flexible_em(f"{left} {gold} {right}", [gold]) == 1


@given(texts, golds)
def test_gold_order_irrelevant(pred, gs):
    assert flexible_em(pred, gs) == flexible_em(pred, gs[::-1])
    assert char_3gram_recall(pred, gs) == char_3gram_recall(pred, gs[::-1])
