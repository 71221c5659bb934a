"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--docs 2000] [--dim 512] [--repeat 5]

Both backends are imported directly, so the numbers do not depend on
MLRAG_PURE_PYTHON. Outputs are checked for bit-equality before timing.
"""

import argparse
import random
import sys
import timeit

import numpy as np

from mlrag import _kernels_py
from mlrag.retrieval import _prepare

try:
    from mlrag import _kernels as compiled
except ImportError:
    sys.exit("compiled extension not built; run `pip install -e . --no-build-isolation`")

WORDS = ("river stone tower bridge north south Fluss Stein Brücke 강 돌 다리 城 桥 "
         "rivière pierre pont ciudad puerto").split()


def corpus(n, rng):
    return [_prepare(" ".join(rng.choice(WORDS) for _ in range(rng.randint(8, 40))))
            for _ in range(n)]


def embed_all(impl, texts, dim):
    return np.vstack([impl.ngram_counts(t, dim, (2, 3)) for t in texts])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--docs", type=int, default=2000)
    ap.add_argument("--dim", type=int, default=512)
    ap.add_argument("--queries", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = random.Random(0)
    texts = corpus(args.docs, rng)
    queries = corpus(args.queries, rng)
    matrix = embed_all(_kernels_py, texts, args.dim)
    assert np.array_equal(matrix, embed_all(compiled, texts, args.dim))
    matrix /= np.linalg.norm(matrix, axis=1, keepdims=True)
    qvecs = embed_all(_kernels_py, queries, args.dim)
    qvecs /= np.linalg.norm(qvecs, axis=1, keepdims=True)

    def search(impl):
        for q in qvecs:
            impl.topk_positions(impl.dot_scores(matrix, q), 50)

    for q in qvecs[:10]:
        a, b = compiled.dot_scores(matrix, q), _kernels_py.dot_scores(matrix, q)
        assert a.tobytes() == b.tobytes()

    _kernels_py.fnv1a64.cache_clear()
    cases = [
        ("embed", f"{args.docs} docs", lambda impl: embed_all(impl, texts, args.dim)),
        ("search", f"{args.queries} queries x {args.docs} docs", search),
    ]
    print(f"{'kernel':<8} {'workload':<28} {'python s':>9} {'cython s':>9} {'speedup':>8}")
    for name, workload, fn in cases:
        # best of N; the fallback's hash cache stays warm after the first round
        py = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat))
        cy = min(timeit.repeat(lambda: fn(compiled), number=1, repeat=args.repeat))
        print(f"{name:<8} {workload:<28} {py:>9.4f} {cy:>9.4f} {py / cy:>7.1f}x")


if __name__ == "__main__":
    main()
