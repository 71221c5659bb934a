import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import retrieval_oracle as oracle
from conftest import tiny_corpus, tiny_queries
from mlrag.corpus import Corpus, Document
from mlrag.errors import ScopeError
from mlrag.retrieval import (IndexCache, ReferenceEmbedder, build_index, embed_text, parse_scope,
                             rerank, resolve_scope, retrieve_for_query, search)

WORDS = ["river", "stone", "Fluss", "Stein", "강", "돌", "rivière", "pierre", "north", "south",
         "tower", "bridge", "城", "桥", "north tower", "old bridge"]


def random_corpus(rng, n, dim):
    docs = []
    for i in range(n):
        text = " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 6)))
        docs.append(Document(f"d{i:04d}", rng.choice(["en", "de", "ko"]), text))
    for i in range(0, n, 25):  # exact duplicates force score ties
        docs.append(Document(f"dup{i:04d}", docs[i].lang, docs[i].text))
    return Corpus("rand", {"en", "de", "ko"}, docs)


def test_embedding_matches_reference_oracle():
    for text in ["Hello  World", "ＡＢＣ def", "에펠탑은 파리에 있다.", "x", "  "]:
        assert np.allclose(embed_text(text, 64), oracle.embed(text, 64), rtol=0, atol=1e-12)


def test_embedding_frozen_values():
    # "ab c": grams ab, b_, _c, ab_, b_c hash (mod 16) to 10, 15, 4, 14, 4
    v = embed_text("ab c", 16)
    expected = np.zeros(16)
    expected[[4, 10, 14, 15]] = [2, 1, 1, 1]
    assert np.allclose(v, expected / np.sqrt(7), rtol=0, atol=1e-15)
    assert [oracle.fnv1a64(g) % 16 for g in ["ab", "b ", " c", "ab ", "b c"]] == [10, 15, 4, 14, 4]


def test_search_matches_brute_force_small():
    rng = random.Random(3)
    corpus = random_corpus(rng, 120, 32)
    emb = ReferenceEmbedder(32)
    index = build_index(corpus, emb)
    vecs = [(d.id, list(index.vector(d.id))) for d in index.docs]
    for _ in range(30):
        q = emb.embed([rng.choice(WORDS) + " " + rng.choice(WORDS)])[0]
        got = [p.doc_id for p in search(index, q, 10)]
        assert got == oracle.brute_force(vecs, list(q), 10)


def test_ties_break_by_doc_id():
    docs = [Document("b", "en", "same text"), Document("a", "en", "same text"),
            Document("c", "en", "other words")]
    emb = ReferenceEmbedder(64)
    index = build_index(Corpus("t", {"en"}, docs), emb)
    hits = search(index, emb.embed(["same text"])[0], 3)
    assert [p.doc_id for p in hits] == ["a", "b", "c"]
    assert hits[0].score == hits[1].score


def test_search_edge_cases():
    emb = ReferenceEmbedder(32)
    index = build_index(tiny_corpus(), emb)
    q = emb.embed(["Paris"])[0]
    assert search(index, q, 0) == []
    assert len(search(index, q, 100)) == len(index)
    with pytest.raises(ValueError):
        search(index, np.zeros(7), 3)


def test_zero_vector_documents_excluded():
    docs = [Document("a", "en", "..."), Document("b", "en", "real text")]
    # punctuation still embeds; only whitespace-free empty n-grams give zero
    index = build_index(Corpus("t", {"en"}, docs + [Document("c", "en", "x")]), ReferenceEmbedder(32))
    assert "c" not in index and "b" in index


@pytest.mark.parametrize("alias,scope", [("sl", "SL"), ("en+sl", "EN_PLUS_SL"), ("ALL", "ALL")])
def test_parse_scope(alias, scope):
    assert parse_scope(alias) == scope


def test_resolve_scope():
    corpus = tiny_corpus()
    assert resolve_scope("SL", "de", corpus) == {"de"}
    assert resolve_scope("EN", "de", corpus) == {"en"}
    assert resolve_scope("EN_PLUS_SL", "ko", corpus) == {"en", "ko"}
    assert resolve_scope("ALL", "ko", corpus) == {"en", "ko", "de", "fr"}
    with pytest.raises(ScopeError, match="no documents"):
        resolve_scope("SL", "ja", corpus)


def test_retrieve_respects_scope_and_k():
    corpus, cache = tiny_corpus(), IndexCache()
    q = tiny_queries()[0]
    hits = retrieve_for_query(q, corpus, "SL", k_retrieve=50, k_context=5, index_cache=cache)
    assert len(hits) == 2 and all(p.lang == "de" for p in hits)
    hits = retrieve_for_query(q, corpus, "ALL", k_retrieve=3, k_context=2, index_cache=cache)
    assert len(hits) == 2
    assert [p.rank for p in hits] == [1, 2]


def test_rerank_orders_by_query_similarity():
    corpus = tiny_corpus()
    emb = ReferenceEmbedder(128)
    index = build_index(corpus, emb)
    cands = search(index, emb.embed(["Berlin"])[0], 7)
    top = rerank("Eiffel Tower Paris", cands, 2, emb, vectors=index)
    assert top[0].doc_id == "en-1"
    with pytest.raises(ValueError):
        rerank("x", cands, 0, emb)


def test_index_cache_persists(tmp_path):
    corpus, emb = tiny_corpus(), ReferenceEmbedder(32)
    first = IndexCache(tmp_path).full_index(corpus, emb)
    assert list(tmp_path.rglob("*"))
    second = IndexCache(tmp_path).full_index(corpus, emb)
    assert first.matrix.tobytes() == second.matrix.tobytes()
    assert [d.id for d in first.docs] == [d.id for d in second.docs]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 12))
def test_search_is_sorted_prefix(seed, k):
    rng = random.Random(seed)
    corpus = random_corpus(rng, 30, 32)
    emb = ReferenceEmbedder(32)
    index = build_index(corpus, emb)
    q = emb.embed([rng.choice(WORDS)])[0]
    full = search(index, q, len(index))
    part = search(index, q, k)
    assert [p.doc_id for p in part] == [p.doc_id for p in full[:k]]
    keys = [(-p.score, p.doc_id) for p in full]
    assert keys == sorted(keys)
