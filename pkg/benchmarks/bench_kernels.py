"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 3]

Both backends are called directly, so the FORESTMAT_PURE_NUMPY flag does
not matter here.  Each row reports the best of ``--repeat`` runs after one
warm-up call (which also absorbs numba's compile time).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from forestmat import _kernels
from forestmat.digraph import build_digraph
from forestmat.oracle import _candidates, forest_table


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    n = 7
    complete = build_digraph(n, [(i, j, 1) for i in range(1, n + 1) for j in range(1, n + 1) if i != j])
    cand, deg = _candidates(complete)
    yield "forest enumeration, complete digraph n=7", (
        lambda: _kernels._forests_numpy(cand, deg),
        lambda: _kernels._forests_numba(cand, deg),
    )

    rng = np.random.default_rng(0)
    adj = rng.random((400, 400)) < 0.005
    np.fill_diagonal(adj, False)
    yield "transitive closure, n=400", (
        lambda: _kernels._closure_numpy(adj),
        lambda: _kernels._closure_numba(adj),
    )

    g = build_digraph(5, [(1, 2, 0.5), (2, 1, 1.0), (3, 4, 0.9), (4, 3, 0.2), (2, 5, 0.6), (4, 5, 0.35)])
    parents, roots = forest_table(g)
    cols = np.arange(g.n)
    plan_prob = np.where(parents >= 0, g.weights[np.where(parents >= 0, parents, 0), cols[None, :]], 1.0)
    trials = 1_000_000
    pick = rng.integers(len(parents), size=trials)
    u = rng.random((trials, g.n))

    def tally(fn):
        counts = np.zeros((g.n, g.n), dtype=np.int64)
        return fn(pick, u, plan_prob, roots, counts)

    yield "dissemination tally, 1e6 trials", (
        lambda: tally(_kernels._tally_numpy),
        lambda: tally(_kernels._tally_numba),
    )


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels._forests_numba is None:
        raise SystemExit("numba is not installed; nothing to compare")
    print(f"{'kernel':44s} {'numpy s':>10s} {'numba s':>10s} {'speedup':>8s}")
    for name, (slow, fast) in cases():
        a = best_of(slow, args.repeat)
        b = best_of(fast, args.repeat)
        print(f"{name:44s} {a:10.4f} {b:10.4f} {a / b:8.1f}")


if __name__ == "__main__":
    main()
