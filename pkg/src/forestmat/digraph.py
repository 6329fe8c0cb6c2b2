"""Weighted digraphs, their column Laplacian, and reachability structure.

Vertices are numbered 1..n in every public signature; matrices are plain
numpy arrays where row/column ``i - 1`` belongs to vertex ``i``.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import _kernels
from .errors import (
    BasisCountOverflow,
    DegenerateTriple,
    LoopArc,
    NonpositiveWeight,
    TooFewVertices,
    VertexOutOfRange,
)

Arc = tuple[int, int, float]


@dataclass(frozen=True, eq=False)
class WeightedDigraph:
    """Loop-free digraph with strictly positive arc weights.

    ``weights[i - 1, j - 1]`` is w_ij, zero when there is no arc i -> j.
    The array is read-only; build instances with :func:`build_digraph`.
    """

    n: int
    weights: np.ndarray = field(repr=False)

    @property
    def arcs(self) -> tuple[Arc, ...]:
        tails, heads = np.nonzero(self.weights)
        return tuple(
            (int(i) + 1, int(j) + 1, float(self.weights[i, j])) for i, j in zip(tails, heads)
        )

    @property
    def adjacency(self) -> np.ndarray:
        return self.weights > 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightedDigraph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.weights, other.weights)

    def __hash__(self) -> int:
        return hash((self.n, self.arcs))

    def __repr__(self) -> str:
        return f"WeightedDigraph(n={self.n}, arcs={len(self.arcs)})"


def build_digraph(n: int, arc_list: Iterable[tuple[int, int, float]]) -> WeightedDigraph:
    """Validate ``(tail, head, weight)`` records and merge parallel arcs by addition."""
    if n < 2:
        raise TooFewVertices(f"need at least 2 vertices, got {n}")
    w = np.zeros((n, n))
    for tail, head, weight in arc_list:
        if not (1 <= tail <= n and 1 <= head <= n):
            raise VertexOutOfRange(f"arc ({tail}, {head}) outside 1..{n}")
        if tail == head:
            raise LoopArc(f"loop at vertex {tail}")
        weight = float(weight)
        if not weight > 0 or not math.isfinite(weight):
            raise NonpositiveWeight(f"arc ({tail}, {head}) has weight {weight}")
        w[tail - 1, head - 1] += weight
    return _freeze(w)


def from_weight_matrix(w: np.ndarray) -> WeightedDigraph:
    w = np.array(w, dtype=float)
    n = w.shape[0]
    tails, heads = np.nonzero(w)
    return build_digraph(n, ((i + 1, j + 1, w[i, j]) for i, j in zip(tails, heads)))


def _freeze(w: np.ndarray) -> WeightedDigraph:
    w.setflags(write=False)
    return WeightedDigraph(w.shape[0], w)


def laplacian(g: WeightedDigraph) -> np.ndarray:
    """Column Laplacian: ``l_ij = -w_ij`` off the diagonal, in-weight on it."""
    lap = 0.0 - g.weights
    np.fill_diagonal(lap, g.weights.sum(axis=0))
    return lap


def reverse(g: WeightedDigraph) -> WeightedDigraph:
    return _freeze(np.array(g.weights.T))


def relabel(g: WeightedDigraph, order: list[int]) -> WeightedDigraph:
    """Renumber so that old vertex ``order[p]`` becomes vertex ``p + 1``."""
    idx = np.asarray(order) - 1
    return _freeze(np.array(g.weights[np.ix_(idx, idx)]))


def symmetrized(g: WeightedDigraph) -> WeightedDigraph:
    """Undirected counterpart as a symmetric digraph, ``w_ij + w_ji`` both ways."""
    return _freeze(g.weights + g.weights.T)


def reach_matrix(g: WeightedDigraph) -> np.ndarray:
    return _kernels.transitive_closure(g.adjacency)


def reachable(g: WeightedDigraph, i: int) -> frozenset[int]:
    """Vertices reachable from ``i`` (``i`` included)."""
    _check_vertex(g, i)
    seen = {i - 1}
    queue = deque([i - 1])
    adj = g.adjacency
    while queue:
        v = queue.popleft()
        for u in np.flatnonzero(adj[v]):
            if u not in seen:
                seen.add(int(u))
                queue.append(int(u))
    return frozenset(v + 1 for v in seen)


def _reaches(adj: np.ndarray, src: int, dst: int, banned: int = -1) -> bool:
    seen = np.zeros(adj.shape[0], dtype=bool)
    seen[src] = True
    if banned >= 0:
        seen[banned] = True
    stack = [src]
    while stack:
        v = stack.pop()
        if v == dst:
            return True
        nxt = np.flatnonzero(adj[v] & ~seen)
        seen[nxt] = True
        stack.extend(nxt.tolist())
    return False


def is_cutpoint(g: WeightedDigraph, k: int, i: int, t: int) -> bool:
    """True iff there is a path from i to t and every such path visits k."""
    for v in (k, i, t):
        _check_vertex(g, v)
    if len({k, i, t}) < 3:
        raise DegenerateTriple(f"cutpoint triple needs distinct vertices, got k={k}, i={i}, t={t}")
    adj = g.adjacency
    return _reaches(adj, i - 1, t - 1) and not _reaches(adj, i - 1, t - 1, banned=k - 1)


def cutpoint_tensor(g: WeightedDigraph) -> np.ndarray:
    """``cut[k, i, t]`` (0-based) iff k is a cutpoint between i and t."""
    n = g.n
    adj = g.adjacency
    full = _kernels.transitive_closure(adj)
    cut = np.zeros((n, n, n), dtype=bool)
    for k in range(n):
        sub = adj.copy()
        sub[k, :] = False
        sub[:, k] = False
        without = _kernels.transitive_closure(sub)
        cut[k] = full & ~without
        cut[k, k, :] = False
        cut[k, :, k] = False
    idx = np.arange(n)
    cut[:, idx, idx] = False
    return cut


@dataclass(frozen=True)
class SourceKnotInfo:
    """Strong components, condensation, source knots and exclusive reach sets.

    ``condensation_arcs`` holds pairs of 0-based positions into ``components``.
    """

    components: tuple[frozenset[int], ...]
    condensation_arcs: frozenset[tuple[int, int]]
    source_knots: tuple[frozenset[int], ...]
    exclusive_reach: tuple[frozenset[int], ...]

    @property
    def d_prime(self) -> int:
        return len(self.source_knots)

    @property
    def knot_union(self) -> frozenset[int]:
        return frozenset().union(*self.source_knots)

    def knot_of(self, v: int) -> frozenset[int] | None:
        for knot in self.source_knots:
            if v in knot:
                return knot
        return None


def strong_components(g: WeightedDigraph) -> SourceKnotInfo:
    n = g.n
    count, labels = connected_components(csr_matrix(g.adjacency), directed=True, connection="strong")
    members: list[list[int]] = [[] for _ in range(count)]
    for v, lab in enumerate(labels):
        members[lab].append(v + 1)
    # deterministic order: by smallest vertex id
    order = sorted(range(count), key=lambda c: members[c][0])
    pos = {c: p for p, c in enumerate(order)}
    components = tuple(frozenset(members[c]) for c in order)
    comp_of = np.array([pos[lab] for lab in labels])

    tails, heads = np.nonzero(g.adjacency)
    cond = frozenset(
        (int(comp_of[a]), int(comp_of[b])) for a, b in zip(tails, heads) if comp_of[a] != comp_of[b]
    )
    has_in = {b for _, b in cond}
    knots = tuple(components[c] for c in range(len(components)) if c not in has_in)

    reach = _kernels.transitive_closure(g.adjacency)
    reached_by = []
    for knot in knots:
        rows = np.array(sorted(knot)) - 1
        reached_by.append(reach[rows].any(axis=0))
    exclusive = []
    for s in range(len(knots)):
        others = np.zeros(n, dtype=bool)
        for r in range(len(knots)):
            if r != s:
                others |= reached_by[r]
        exclusive.append(frozenset(int(v) + 1 for v in np.flatnonzero(reached_by[s] & ~others)))
    return SourceKnotInfo(components, cond, knots, tuple(exclusive))


def vertex_bases(g: WeightedDigraph, cap: int = 10**6) -> Iterator[frozenset[int]]:
    """All vertex bases: one vertex from every source knot, nothing else."""
    knots = strong_components(g).source_knots
    total = math.prod(len(k) for k in knots)
    if total > cap:
        raise BasisCountOverflow(f"{total} vertex bases exceed the cap {cap}")
    for pick in itertools.product(*(sorted(k) for k in knots)):
        yield frozenset(pick)


def standard_numeration(g: WeightedDigraph) -> list[int]:
    """Vertex order with K_1 first, then K_2, ..., and non-knot vertices last."""
    info = strong_components(g)
    order = [v for knot in info.source_knots for v in sorted(knot)]
    rest = sorted(set(range(1, g.n + 1)) - set(order))
    return order + rest


def numerical_rank(m: np.ndarray, rel_tol: float = 1e-9) -> int:
    """Rank by Gaussian elimination with complete pivoting.

    Elimination stops once the largest remaining pivot is at most
    ``rel_tol * max|m|``.
    """
    a = np.array(m, dtype=float)
    scale = np.abs(a).max() if a.size else 0.0
    if scale == 0.0:
        return 0
    thresh = rel_tol * scale
    rank = 0
    rows, cols = a.shape
    for step in range(min(rows, cols)):
        block = np.abs(a[step:, step:])
        r, c = np.unravel_index(np.argmax(block), block.shape)
        if block[r, c] <= thresh:
            break
        r += step
        c += step
        a[[step, r]] = a[[r, step]]
        a[:, [step, c]] = a[:, [c, step]]
        a[step + 1 :, step:] -= np.outer(a[step + 1 :, step] / a[step, step], a[step, step:])
        rank += 1
    return rank


def _check_vertex(g: WeightedDigraph, v: int) -> None:
    if not 1 <= v <= g.n:
        raise VertexOutOfRange(f"vertex {v} outside 1..{g.n}")
