"""Answer-matching metrics: flexible exact match and character 3-gram recall."""

from __future__ import annotations

import unicodedata
from collections import Counter
from typing import Sequence


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def normalize(text: str) -> str:
    """NFKC, case-fold, punctuation to spaces, collapse whitespace.

    No word tokenization and no article stripping, so the result is usable
    for unsegmented scripts (Chinese, Japanese, Thai).
    """
    text = unicodedata.normalize("NFKC", text).casefold()
    text = "".join(" " if _is_punct(ch) else ch for ch in text)
    return " ".join(text.split())


def flexible_em(prediction: str, golds: Sequence[str]) -> int:
    """1 if some normalized gold occurs inside the normalized prediction."""
    if not golds:
        raise ValueError("golds must be non-empty")
    pred = normalize(prediction)
    for gold in golds:
        g = normalize(gold)
        if g and g in pred:
            return 1
    return 0


def char_ngrams(text: str, n: int = 3) -> list[str]:
    return [text[i:i + n] for i in range(len(text) - n + 1)]


def _recall_one(pred: str, gold: str, n: int) -> float:
    if len(gold) < n:
        return 1.0 if gold and gold in pred else 0.0
    gold_grams = Counter(char_ngrams(gold, n))
    overlap = gold_grams & Counter(char_ngrams(pred, n))
    return sum(overlap.values()) / sum(gold_grams.values())


def char_3gram_recall(prediction: str, golds: Sequence[str]) -> float:
    """Best-over-golds share of gold character trigrams found in the prediction.

    Trigram multisets are intersected with clipping; golds shorter than three
    characters fall back to containment.
    """
    if not golds:
        raise ValueError("golds must be non-empty")
    pred = normalize(prediction)
    return max(_recall_one(pred, normalize(g), 3) for g in golds)
