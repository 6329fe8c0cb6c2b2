"""Brute-force spanning-forest enumeration in exact arithmetic.

This is the ground truth the matrix engine is tested against, so it stays
deliberately naive: every vertex picks one incoming arc (or none), circuits
are thrown out, and weights are multiplied out as Python ints or Fractions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from . import _kernels
from .digraph import WeightedDigraph, build_digraph, reverse, strong_components
from .errors import EnumerationCapExceeded, NotASourceKnot

DEFAULT_CAP = 10**7


@dataclass(frozen=True)
class SpanningForest:
    """A spanning out-forest (or in-forest); vertex ids are 1-based.

    For an in-forest the arcs point towards the roots and ``tree_of`` maps a
    vertex to the root its tree converges to.
    """

    arcs: tuple[tuple[int, int], ...]
    roots: frozenset[int]
    tree_of: dict[int, int]


def exact_weight(w: float) -> int | Fraction:
    """Exact value of a weight: an int when integral, else the shortest decimal."""
    if float(w).is_integer():
        return int(w)
    return Fraction(repr(float(w)))


def _candidates(g: WeightedDigraph) -> tuple[np.ndarray, np.ndarray]:
    adj = g.adjacency
    deg = adj.sum(axis=0).astype(np.int64)
    cand = np.full((g.n, max(1, int(deg.max()))), -1, dtype=np.int64)
    for v in range(g.n):
        tails = np.flatnonzero(adj[:, v])
        cand[v, : len(tails)] = tails
    return cand, deg


def forest_table(g: WeightedDigraph, cap: int = DEFAULT_CAP) -> tuple[np.ndarray, np.ndarray]:
    """``(parents, roots)`` arrays (0-based) for all out-forests of ``g``."""
    cand, deg = _candidates(g)
    total = _kernels.assignment_count(deg)
    if total > cap:
        raise EnumerationCapExceeded(f"{total} incoming-arc assignments exceed the cap {cap}")
    return _kernels.enumerate_forest_parents(cand, deg)


def _to_forests(parents: np.ndarray, roots: np.ndarray, flip: bool = False) -> list[SpanningForest]:
    out = []
    for par, rt in zip(parents, roots):
        arcs = [(int(p) + 1, v + 1) for v, p in enumerate(par) if p >= 0]
        if flip:
            arcs = [(b, a) for a, b in arcs]
        arcs.sort()
        out.append(
            SpanningForest(
                tuple(arcs),
                frozenset(v + 1 for v, p in enumerate(par) if p < 0),
                {v + 1: int(r) + 1 for v, r in enumerate(rt)},
            )
        )
    out.sort(key=lambda f: f.arcs)
    return out


def enumerate_out_forests(g: WeightedDigraph, cap: int = DEFAULT_CAP) -> list[SpanningForest]:
    """Every spanning out-forest, ordered lexicographically by arc list."""
    return _to_forests(*forest_table(g, cap))


def enumerate_in_forests(g: WeightedDigraph, cap: int = DEFAULT_CAP) -> list[SpanningForest]:
    """Every spanning in-forest: out-forests of the reversed digraph, arcs flipped back."""
    return _to_forests(*forest_table(reverse(g), cap), flip=True)


def forest_weight(g: WeightedDigraph, forest: SpanningForest) -> int | Fraction:
    w = 1
    for a, b in forest.arcs:
        w *= exact_weight(g.weights[a - 1, b - 1])
    return w


@dataclass(frozen=True)
class OracleExpansion:
    """Exact sigma_k and Q_k (nested lists of int/Fraction), k = 0..n-1."""

    sigma_exact: list
    q_exact: list
    forests_by_size: list[int]

    @property
    def max_arcs(self) -> int:
        return max(k for k, c in enumerate(self.forests_by_size) if c)

    def sigma_float(self) -> np.ndarray:
        return np.array([float(s) for s in self.sigma_exact])

    def q_float(self) -> np.ndarray:
        return np.array([[[float(x) for x in row] for row in qk] for qk in self.q_exact])


def _exact_weight_matrix(g: WeightedDigraph) -> np.ndarray:
    wx = np.empty((g.n, g.n), dtype=object)
    for i in range(g.n):
        for j in range(g.n):
            wx[i, j] = exact_weight(g.weights[i, j])
    return wx


def oracle_expansion(g: WeightedDigraph, cap: int = DEFAULT_CAP) -> OracleExpansion:
    """sigma_k = total weight of k-arc out-forests; q_ij^k = weight of those with j under root i."""
    n = g.n
    parents, roots = forest_table(g, cap)
    wx = _exact_weight_matrix(g)
    sizes = (parents >= 0).sum(axis=1)
    sigma = [0] * n
    q = [[[0] * n for _ in range(n)] for _ in range(n)]
    counts = [0] * n
    for par, rt, k in zip(parents, roots, sizes):
        w = 1
        for v, p in enumerate(par):
            if p >= 0:
                w *= wx[p, v]
        sigma[k] += w
        counts[k] += 1
        qk = q[k]
        for j, r in enumerate(rt):
            qk[r][j] += w
    return OracleExpansion(sigma, q, counts)


def in_forest_proximity(g: WeightedDigraph, tau: Fraction | int = 1, cap: int = DEFAULT_CAP) -> list[list]:
    """Exact in-accessibility from its forest definition.

    Entry (i, j) is the weight of in-forests of g(tau) in which the tree
    containing i converges to j, over the weight of all in-forests.
    """
    n = g.n
    num = [[0] * n for _ in range(n)]
    total = 0
    for forest in enumerate_in_forests(g, cap):
        w = 1
        for a, b in forest.arcs:
            w *= tau * exact_weight(g.weights[a - 1, b - 1])
        total += w
        for i, root in forest.tree_of.items():
            num[i - 1][root - 1] += w
    return [[Fraction(x) / total for x in row] for row in num]


def _require_knot(g: WeightedDigraph, knot: Iterable[int]) -> frozenset[int]:
    knot = frozenset(knot)
    if knot not in strong_components(g).source_knots:
        raise NotASourceKnot(f"{sorted(knot)} is not a source knot")
    return knot


def restriction(g: WeightedDigraph, vertices: Iterable[int]) -> tuple[WeightedDigraph | None, list[int]]:
    """Induced subgraph on ``vertices`` (renumbered 1..m in sorted order)."""
    verts = sorted(vertices)
    if len(verts) < 2:
        return None, verts
    idx = np.array(verts) - 1
    sub = g.weights[np.ix_(idx, idx)]
    arcs = [(a + 1, b + 1, sub[a, b]) for a, b in zip(*np.nonzero(sub))]
    return build_digraph(len(verts), arcs), verts


def knot_tree_weights(g: WeightedDigraph, knot: Iterable[int]) -> tuple[int | Fraction, dict[int, int | Fraction]]:
    """Weights of the spanning diverging trees of the knot, in total and per root."""
    knot = _require_knot(g, knot)
    sub, verts = restriction(g, knot)
    if sub is None:
        return 1, {verts[0]: 1}
    per_root = {v: 0 for v in verts}
    for forest in enumerate_out_forests(sub):
        if len(forest.roots) == 1:
            (r,) = forest.roots
            per_root[verts[r - 1]] += forest_weight(sub, forest)
    return sum(per_root.values()), per_root


def without_knot_arcs(g: WeightedDigraph, knot: frozenset[int]) -> WeightedDigraph:
    w = np.array(g.weights)
    idx = np.array(sorted(knot)) - 1
    w[np.ix_(idx, idx)] = 0.0
    arcs = [(a + 1, b + 1, w[a, b]) for a, b in zip(*np.nonzero(w))]
    return build_digraph(g.n, arcs)


def max_forest_reach_weight(g: WeightedDigraph, knot: Iterable[int], j: int) -> int | Fraction:
    """Weight of the maximum out-forests of g minus the knot's inner arcs in which
    j is reachable from a vertex of the knot."""
    knot = _require_knot(g, knot)
    h = without_knot_arcs(g, knot)
    forests = enumerate_out_forests(h)
    top = max(len(f.arcs) for f in forests)
    total = 0
    for forest in forests:
        if len(forest.arcs) != top:
            continue
        parent = {b: a for a, b in forest.arcs}
        v = j
        hit = v in knot
        while not hit and v in parent:
            v = parent[v]
            hit = v in knot
        if hit:
            total += forest_weight(h, forest)
    return total


def exact_j_tilde(g: WeightedDigraph, cap: int = DEFAULT_CAP) -> list[list[Fraction]]:
    oe = oracle_expansion(g, cap)
    top = oe.max_arcs
    s = oe.sigma_exact[top]
    return [[Fraction(x) / s for x in row] for row in oe.q_exact[top]]


# ---------------------------------------------------------------------------
# Batch oracle over many digraphs on the same n with small integer weights.
# Forests of g are exactly the forests of the complete digraph whose arcs all
# lie in g, so the complete digraph is enumerated once and the per-graph
# weights are multiplied out in int64 (guarded against overflow).
# ---------------------------------------------------------------------------


def complete_forest_table(n: int) -> tuple[np.ndarray, np.ndarray]:
    cand = np.array([[u for u in range(n) if u != v] for v in range(n)], dtype=np.int64)
    deg = np.full(n, n - 1, dtype=np.int64)
    return _kernels.enumerate_forest_parents(cand, deg)


def oracle_expansion_batch(weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact ``(sigma, Q)`` for a stack of integer weight matrices of shape (B, n, n).

    Returns int64 arrays of shapes (B, n) and (B, n, n, n), k = 0..n-1.
    """
    weights = np.asarray(weights)
    if not np.issubdtype(weights.dtype, np.integer):
        raise TypeError("batch oracle needs integer weights")
    b, n, _ = weights.shape
    parents, roots = complete_forest_table(n)
    nf = len(parents)
    wmax = int(weights.max()) if weights.size else 0
    if nf * max(wmax, 1) ** (n - 1) >= 2**62:
        raise OverflowError("int64 would overflow for these weights")

    verts = np.arange(n)
    safe_par = np.where(parents >= 0, parents, 0)
    # factor[b, f, v] = weight of the arc entering v in forest f (1 at roots)
    factor = weights[:, safe_par, verts[None, :]].astype(np.int64)
    factor[:, parents < 0] = 1
    fw = factor.prod(axis=2)
    size = (parents >= 0).sum(axis=1)

    sigma = np.zeros((b, n), dtype=np.int64)
    q = np.zeros((b, n, n, n), dtype=np.int64)
    onehot = np.zeros((nf, n, n), dtype=np.int64)
    onehot[np.arange(nf)[:, None], roots, verts[None, :]] = 1
    for k in range(n):
        sel = size == k
        sigma[:, k] = fw[:, sel].sum(axis=1)
        q[:, k] = np.tensordot(fw[:, sel], onehot[sel], axes=(1, 0))
    return sigma, q
