"""Hot loops, each in two flavours: a numba ``@njit`` kernel and a numpy twin.

The numba path is used when numba imports and ``FORESTMAT_PURE_NUMPY`` is
unset (or ``0``).  Both paths return identical arrays for identical inputs;
``tests/test_kernels.py`` holds them to that and ``benchmarks/bench_kernels.py``
times them against each other.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

PURE_NUMPY = os.environ.get("FORESTMAT_PURE_NUMPY", "0") not in ("", "0")
USE_NUMBA = numba is not None and not PURE_NUMPY

_CHUNK = 1 << 16


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# Forest enumeration: every vertex picks one incoming arc or none; assignments
# containing a circuit are dropped.  ``cand[v, :deg[v]]`` lists the tails of
# the arcs entering ``v``.  Assignments are visited in mixed-radix order with
# the last vertex varying fastest (``itertools.product`` order).
# ---------------------------------------------------------------------------


def assignment_count(deg: np.ndarray) -> int:
    total = 1
    for d in deg:
        total *= int(d) + 1
    return total


def _forests_numpy(cand: np.ndarray, deg: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = len(deg)
    radix = deg.astype(np.int64) + 1
    total = assignment_count(deg)
    # choice table: column 0 means "no parent"
    table = np.full((n, int(radix.max())), -1, dtype=np.int64)
    for v in range(n):
        table[v, 1 : deg[v] + 1] = cand[v, : deg[v]]
    place = np.ones(n, dtype=np.int64)
    for v in range(n - 2, -1, -1):
        place[v] = place[v + 1] * radix[v + 1]
    rounds = max(1, int(np.ceil(np.log2(max(n, 2)))) + 1)
    verts = np.arange(n)

    parents_out, roots_out = [], []
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        digits = (idx[:, None] // place[None, :]) % radix[None, :]
        parent = table[verts[None, :], digits]
        ptr = np.where(parent >= 0, parent, verts[None, :])
        for _ in range(rounds):
            ptr = np.take_along_axis(ptr, ptr, axis=1)
        ok = (np.take_along_axis(parent, ptr, axis=1) < 0).all(axis=1)
        parents_out.append(parent[ok])
        roots_out.append(ptr[ok])
    return np.concatenate(parents_out), np.concatenate(roots_out)


def _make_forests_numba():
    @numba.njit(cache=True)
    def _walk(cand, deg, fill, parents, roots):
        n = deg.shape[0]
        digits = np.zeros(n, dtype=np.int64)
        parent = np.empty(n, dtype=np.int64)
        root = np.empty(n, dtype=np.int64)
        found = 0
        while True:
            for v in range(n):
                parent[v] = cand[v, digits[v] - 1] if digits[v] > 0 else -1
            ok = True
            for v in range(n):
                u = v
                steps = 0
                while parent[u] >= 0 and steps <= n:
                    u = parent[u]
                    steps += 1
                if steps > n:
                    ok = False
                    break
                root[v] = u
            if ok:
                if fill:
                    for v in range(n):
                        parents[found, v] = parent[v]
                        roots[found, v] = root[v]
                found += 1
            # advance the mixed-radix counter, last vertex fastest
            v = n - 1
            while v >= 0:
                digits[v] += 1
                if digits[v] <= deg[v]:
                    break
                digits[v] = 0
                v -= 1
            if v < 0:
                break
        return found

    def forests(cand, deg):
        cand = np.ascontiguousarray(cand, dtype=np.int64)
        deg = np.ascontiguousarray(deg, dtype=np.int64)
        dummy = np.empty((0, len(deg)), dtype=np.int64)
        count = _walk(cand, deg, False, dummy, dummy)
        parents = np.empty((count, len(deg)), dtype=np.int64)
        roots = np.empty((count, len(deg)), dtype=np.int64)
        _walk(cand, deg, True, parents, roots)
        return parents, roots

    return forests


# ---------------------------------------------------------------------------
# Reflexive transitive closure (Warshall).
# ---------------------------------------------------------------------------


def _closure_numpy(adj: np.ndarray) -> np.ndarray:
    n = adj.shape[0]
    reach = adj.astype(bool) | np.eye(n, dtype=bool)
    for m in range(n):
        reach |= reach[:, m : m + 1] & reach[m : m + 1, :]
    return reach


def _make_closure_numba():
    @numba.njit(cache=True)
    def closure(adj):
        n = adj.shape[0]
        reach = np.zeros((n, n), dtype=np.bool_)
        for i in range(n):
            for j in range(n):
                reach[i, j] = adj[i, j] or i == j
        for m in range(n):
            for i in range(n):
                if reach[i, m]:
                    for j in range(n):
                        if reach[m, j]:
                            reach[i, j] = True
        return reach

    def wrapped(adj):
        return closure(np.ascontiguousarray(adj, dtype=np.bool_))

    return wrapped


# ---------------------------------------------------------------------------
# Dissemination tallies: trial t uses plan ``pick[t]``; it succeeds when every
# uniform draw ``u[t, a]`` falls below the plan's arc probability
# ``plan_prob[pick[t], a]`` (padding columns hold 1.0).  Successful trials add
# one to ``counts[root, j]`` for every vertex j.
# ---------------------------------------------------------------------------


def _tally_numpy(pick, u, plan_prob, roots, counts):
    ok = (u < plan_prob[pick]).all(axis=1)
    hit = roots[pick[ok]]
    n = roots.shape[1]
    np.add.at(counts, (hit.ravel(), np.tile(np.arange(n), hit.shape[0])), 1)
    return int(ok.sum())


def _make_tally_numba():
    @numba.njit(cache=True)
    def tally(pick, u, plan_prob, roots, counts):
        n = roots.shape[1]
        width = u.shape[1]
        good = 0
        for t in range(pick.shape[0]):
            f = pick[t]
            ok = True
            for a in range(width):
                if not u[t, a] < plan_prob[f, a]:
                    ok = False
                    break
            if ok:
                good += 1
                for j in range(n):
                    counts[roots[f, j], j] += 1
        return good

    return tally


if numba is not None:
    _forests_numba = _make_forests_numba()
    _closure_numba = _make_closure_numba()
    _tally_numba = _make_tally_numba()
else:  # pragma: no cover
    _forests_numba = _closure_numba = _tally_numba = None


def enumerate_forest_parents(cand: np.ndarray, deg: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(parents, roots)``, one row per circuit-free assignment.

    ``parents[f, v]`` is the tail of the arc entering ``v`` (``-1`` for a root)
    and ``roots[f, v]`` the root of the tree containing ``v``.
    """
    if USE_NUMBA:
        return _forests_numba(cand, deg)
    return _forests_numpy(np.asarray(cand, dtype=np.int64), np.asarray(deg, dtype=np.int64))


def transitive_closure(adj: np.ndarray) -> np.ndarray:
    """Boolean reach matrix: ``reach[i, j]`` iff j is reachable from i (i reaches i)."""
    if USE_NUMBA:
        return _closure_numba(adj)
    return _closure_numpy(adj)


def dissemination_tally(pick, u, plan_prob, roots, counts) -> int:
    """Accumulate root counts of successful trials into ``counts``; return successes."""
    if USE_NUMBA:
        return _tally_numba(pick, u, plan_prob, roots, counts)
    return _tally_numpy(pick, u, plan_prob, roots, counts)
