"""Score vectors from weighted preference digraphs.

An arc i -> j of weight w records that i is preferred to j with strength w,
so the leaders sit in the source knots.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .digraph import WeightedDigraph, laplacian, strong_components, symmetrized
from .errors import NotStronglyConnected
from .forests import expansion_of, j_of_tau, j_tilde

TIE_TOL = 1e-9
METHODS = ("kernel_mean", "daniels_tree", "borda")


@dataclass(frozen=True)
class ScoreVector:
    values: np.ndarray
    method: str
    params: dict | None = None


@dataclass(frozen=True)
class RankingReport:
    ordering: tuple[int, ...]
    tie_groups: tuple[frozenset[int], ...]


def kernel_basis(g: WeightedDigraph) -> list[np.ndarray]:
    """One column of J~ per source knot, taken at the knot's smallest vertex.

    The vectors span the solutions of ``L x = 0``; the s-th one is supported
    on the s-th knot and sums to one.
    """
    jt = j_tilde(expansion_of(g)).j_tilde
    return [jt[:, min(knot) - 1].copy() for knot in strong_components(g).source_knots]


def mean_limit_scores(g: WeightedDigraph) -> ScoreVector:
    """Row means of J~: the average of all its columns."""
    jt = j_tilde(expansion_of(g)).j_tilde
    return ScoreVector(jt.mean(axis=1), "kernel_mean")


def tree_weights(g: WeightedDigraph) -> np.ndarray:
    """t_j = weight of spanning out-arborescences rooted at j, as the (j, j) minor of L."""
    lap = laplacian(g)
    n = g.n
    t = np.empty(n)
    for j in range(n):
        keep = np.r_[0:j, j + 1 : n]
        t[j] = np.linalg.det(lap[np.ix_(keep, keep)])
    return t


def daniels_tree_scores(g: WeightedDigraph) -> ScoreVector:
    if len(strong_components(g).components) != 1:
        raise NotStronglyConnected("tree-weight scores need a strongly connected digraph")
    return ScoreVector(tree_weights(g), "daniels_tree")


def net_strength(g: WeightedDigraph) -> np.ndarray:
    """Weighted out-strength minus in-strength per vertex."""
    return g.weights.sum(axis=1) - g.weights.sum(axis=0)


def borda_scores(g: WeightedDigraph, tau: float = 1.0) -> ScoreVector:
    """Generalized Borda: J(tau) of the symmetrized graph applied to net strengths."""
    jsym = j_of_tau(expansion_of(symmetrized(g)), tau).j_matrix
    return ScoreVector(jsym @ net_strength(g), "borda", {"tau": float(tau)})


def rank(scores: ScoreVector | np.ndarray, tol: float = TIE_TOL) -> RankingReport:
    """Order vertices by descending score; ties (after scaling by max |score|)
    are listed by ascending id and reported as groups."""
    values = np.asarray(scores.values if isinstance(scores, ScoreVector) else scores, dtype=float)
    scale = float(np.abs(values).max()) if values.size else 0.0
    norm = values / scale if scale > 0 else values
    order = sorted(range(len(values)), key=lambda v: (-norm[v], v))

    groups: list[list[int]] = []
    for v in order:
        if groups and norm[groups[-1][0]] - norm[v] <= tol:
            groups[-1].append(v)
        else:
            groups.append([v])
    ordering = tuple(v + 1 for grp in groups for v in sorted(grp))
    ties = tuple(frozenset(v + 1 for v in grp) for grp in groups if len(grp) > 1)
    return RankingReport(ordering, ties)
