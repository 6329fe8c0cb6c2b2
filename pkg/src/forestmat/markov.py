"""Markov chains that inversely correspond to a digraph, and the forest
dissemination model.

The chain attached to ``g`` has ``I - P = alpha * L^T``: it moves from j to
i != j with probability ``alpha * w_ij``, i.e. against the arcs, from worse
alternatives towards better ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .digraph import WeightedDigraph, laplacian
from .errors import AlphaTooLarge, WeightAboveOne
from .forests import expansion_of, j_of_tau, j_tilde
from .oracle import DEFAULT_CAP, forest_table
from .ranking import ScoreVector


@dataclass(frozen=True)
class MarkovChain:
    p: np.ndarray
    alpha: float


def max_alpha(g: WeightedDigraph) -> float:
    top = float(laplacian(g).diagonal().max())
    return np.inf if top == 0 else 1.0 / top


def inverse_chain(g: WeightedDigraph, alpha: float | None = None) -> MarkovChain:
    """Row-stochastic ``P = I - alpha * L^T``.

    The default alpha is half the largest admissible value, which keeps every
    diagonal entry at least 1/2 (so the chain is aperiodic).
    """
    lap = laplacian(g)
    top = float(lap.diagonal().max())
    if alpha is None:
        alpha = 1.0 if top == 0 else 1.0 / (2.0 * top)
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if top > 0 and alpha * top > 1.0 + 1e-15:
        raise AlphaTooLarge(f"alpha = {alpha} exceeds 1/max(l_ii) = {1.0 / top:.6g}")
    p = np.eye(g.n) - alpha * lap.T
    # diagonal can dip below zero by one ulp at the admissible limit
    np.clip(p, 0.0, 1.0, out=p)
    return MarkovChain(p, float(alpha))


@dataclass(frozen=True)
class CesaroResult:
    pi: np.ndarray
    iterations: int
    residual: float
    converged: bool


def cesaro_limit(chain: MarkovChain, max_iters: int = 200, tol: float = 1e-9, method: str = "doubling") -> CesaroResult:
    """Cesaro limit of the powers of ``chain.p``.

    ``method="average"`` accumulates the running mean (1/m) sum_{k<m} P^k
    until it is stationary to within ``tol``; it converges like 1/m, so it
    only suits loose tolerances.  ``method="doubling"`` squares the lazy chain
    (I + P)/2, whose powers converge to the same limit even when P is
    periodic; ``iterations`` then counts squarings.  Either way ``residual``
    is ``max(|A P - A|, |P A - A|)`` for the returned ``A``.
    """
    p = chain.p
    n = len(p)
    if method == "average":
        power = np.eye(n)
        total = np.zeros((n, n))
        change = np.inf
        m = 0
        while m < max_iters:
            total = total + power
            m += 1
            power = power @ p
            # mean @ P - mean telescopes to (P^m - I) / m
            change = float(np.abs(power - np.eye(n)).max()) / m
            if change <= tol:
                break
        pi = total / m
    elif method == "doubling":
        pi = 0.5 * (np.eye(n) + p)
        m = 0
        change = np.inf
        while m < max_iters:
            nxt = pi @ pi
            m += 1
            change = float(np.abs(nxt - pi).max())
            pi = nxt
            if change <= tol:
                break
    else:
        raise ValueError(f"unknown method {method!r}")
    residual = max(float(np.abs(pi @ p - pi).max()), float(np.abs(p @ pi - pi).max()))
    return CesaroResult(pi, m, residual, bool(change <= tol and residual <= tol))


def limit_deviation(g: WeightedDigraph, alpha: float | None = None, max_iters: int = 200, tol: float = 1e-9) -> float:
    """Largest entrywise gap between the chain's Cesaro limit and the transpose of J~."""
    pi = cesaro_limit(inverse_chain(g, alpha), max_iters, tol).pi
    return float(np.abs(pi - j_tilde(expansion_of(g)).j_tilde.T).max())


def uniform_start_limit(g: WeightedDigraph, alpha: float | None = None, max_iters: int = 200, tol: float = 1e-9) -> ScoreVector:
    """Limiting state distribution of the chain started from the uniform distribution."""
    chain = inverse_chain(g, alpha)
    pi = cesaro_limit(chain, max_iters, tol).pi
    return ScoreVector(pi.mean(axis=0), "kernel_mean", {"route": "markov", "alpha": chain.alpha})


@dataclass(frozen=True)
class DisseminationEstimate:
    j_hat: np.ndarray
    stderr: np.ndarray
    trials: int
    successes: int
    seed: int


def simulate_dissemination(
    g: WeightedDigraph,
    trials: int = 100_000,
    seed: int = 0,
    cap: int = DEFAULT_CAP,
    chunk: int = 1 << 16,
) -> DisseminationEstimate:
    """Monte-Carlo estimate of P(j's information came from root i | plan succeeded).

    Each trial picks a transmission plan (a spanning out-forest) uniformly at
    random; every plan arc succeeds independently with probability equal to
    its weight.  Successful trials are tallied by the root of each vertex.
    """
    if (g.weights > 1.0).any():
        raise WeightAboveOne("arc weights double as success probabilities and must be <= 1")
    parents, roots = forest_table(g, cap)
    n = g.n
    cols = np.arange(n)
    plan_prob = np.where(parents >= 0, g.weights[np.where(parents >= 0, parents, 0), cols[None, :]], 1.0)
    plan_prob = np.ascontiguousarray(plan_prob)
    roots = np.ascontiguousarray(roots, dtype=np.int64)

    rng = np.random.default_rng(seed)
    counts = np.zeros((n, n), dtype=np.int64)
    good = 0
    done = 0
    while done < trials:
        c = min(chunk, trials - done)
        pick = rng.integers(len(parents), size=c)
        u = rng.random((c, n))
        good += _kernels.dissemination_tally(pick, u, plan_prob, roots, counts)
        done += c
    if good == 0:
        j_hat = np.full((n, n), np.nan)
        stderr = np.full((n, n), np.nan)
    else:
        j_hat = counts / good
        stderr = np.sqrt(j_hat * (1.0 - j_hat) / good)
    return DisseminationEstimate(j_hat, stderr, int(trials), int(good), int(seed))


def forest_stochastic_matrix(g: WeightedDigraph) -> np.ndarray:
    """J = Q / sigma summed over all forest sizes (Q(1) / sigma(1))."""
    return j_of_tau(expansion_of(g), 1.0).j_matrix
