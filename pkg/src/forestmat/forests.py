"""Forest coefficients and forest matrices of a column Laplacian.

The engine never enumerates forests.  It runs the trace recurrence

    sigma_k = tr(L Q_{k-1}) / k,        Q_k = sigma_k I - L Q_{k-1},

which yields the out-forest weights sigma_k and the forest matrices Q_k at
O(n^3) per step.  ``forestmat.oracle`` checks it against brute force.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .digraph import WeightedDigraph, laplacian, strong_components
from .errors import (
    AlphaOutOfBounds,
    IndexBeyondMaxForest,
    NumericalBreakdown,
    UndefinedBound,
    ZeroSigma,
)

IDENTITY_RTOL = 1e-9
REWRITE_RTOL = 1e-12


def forest_recurrence(lap: np.ndarray, steps: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Run the trace recurrence for ``steps`` steps (default n) on a stack of Laplacians.

    ``lap`` has shape ``(..., n, n)``.  Returns ``sigma`` of shape
    ``(..., steps + 1)`` and ``q`` of shape ``(..., steps + 1, n, n)``; no
    truncation is applied, so entries past the maximum forest size carry
    whatever rounding residue the recurrence leaves there.
    """
    lap = np.asarray(lap, dtype=float)
    n = lap.shape[-1]
    steps = n if steps is None else steps
    batch = lap.shape[:-2]
    sigma = np.zeros(batch + (steps + 1,))
    q = np.zeros(batch + (steps + 1, n, n))
    eye = np.eye(n)
    sigma[..., 0] = 1.0
    q[..., 0, :, :] = eye
    for k in range(1, steps + 1):
        lq = lap @ q[..., k - 1, :, :]
        s = np.trace(lq, axis1=-2, axis2=-1) / k
        sigma[..., k] = s
        q[..., k, :, :] = s[..., None, None] * eye - lq
    return sigma, q


@dataclass(frozen=True)
class ForestExpansion:
    """sigma_0..sigma_n (zero past n - d') and Q_0..Q_{n-d'}."""

    sigma: np.ndarray
    q_matrices: tuple[np.ndarray, ...]
    d_prime: int
    laplacian: np.ndarray

    @property
    def n(self) -> int:
        return self.laplacian.shape[0]

    @property
    def max_arcs(self) -> int:
        return self.n - self.d_prime

    def sigma_trees(self, trees: int) -> float:
        """Weight of the out-forests with ``trees`` trees (index n - trees)."""
        if not 1 <= trees <= self.n:
            raise IndexError(f"tree count {trees} outside 1..{self.n}")
        return float(self.sigma[self.n - trees])


def forest_expansion(lap: np.ndarray, d_prime: int) -> ForestExpansion:
    lap = np.asarray(lap, dtype=float)
    n = lap.shape[0]
    top = n - d_prime
    steps = min(top + 1, n)
    sigma, q = forest_recurrence(lap, steps)

    smax = float(np.abs(sigma[: top + 1]).max())
    if (sigma[: top + 1] < -IDENTITY_RTOL * smax).any():
        bad = int(np.argmax(sigma[: top + 1] < -IDENTITY_RTOL * smax))
        raise NumericalBreakdown(f"sigma_{bad} = {sigma[bad]:.3g} came out negative")
    if sigma[top] <= 0:
        raise NumericalBreakdown(f"sigma_{top} = {sigma[top]:.3g} should be positive")

    # the step past the maximum forest must vanish; it is a sum of terms
    # sigma_{top+1-i} (-L)^i that cancel, so its rounding is judged against
    # the largest of them
    if steps > top:
        lnorm = float(np.abs(lap).sum(axis=1).max())
        terms = [abs(sigma[top + 1 - i]) * lnorm**i for i in range(1, top + 2)]
        bound = IDENTITY_RTOL * max(terms)
        residue = max(abs(sigma[top + 1]), float(np.abs(q[top + 1]).max()))
        if residue > bound:
            raise NumericalBreakdown(
                f"Q_{top + 1} has entries of size {residue:.3g}; expected zero (d' = {d_prime})"
            )

    out_sigma = np.zeros(n + 1)
    out_sigma[: top + 1] = np.maximum(sigma[: top + 1], 0.0)
    qs = []
    for k in range(top + 1):
        qk = q[k].copy()
        # rounding residue below zero; the true entries are forest weights
        qk[(qk < 0) & (qk >= -IDENTITY_RTOL * max(out_sigma[k], 1.0))] = 0.0
        qk.setflags(write=False)
        qs.append(qk)
    out_sigma.setflags(write=False)
    lap = lap.copy()
    lap.setflags(write=False)
    return ForestExpansion(out_sigma, tuple(qs), d_prime, lap)


def expansion_of(g: WeightedDigraph) -> ForestExpansion:
    return forest_expansion(laplacian(g), strong_components(g).d_prime)


def sigma_of_tau(exp: ForestExpansion, tau: float) -> float:
    """Total out-forest weight with all arc weights scaled by ``tau``."""
    _check_tau(tau)
    return float(np.polynomial.polynomial.polyval(tau, exp.sigma[: exp.max_arcs + 1]))


def q_of_tau(exp: ForestExpansion, tau: float) -> np.ndarray:
    _check_tau(tau)
    out = np.zeros((exp.n, exp.n))
    # Horner from the top coefficient
    for qk in reversed(exp.q_matrices):
        out = out * tau + qk
    return out


@dataclass(frozen=True)
class ParametricProximity:
    tau: float
    j_matrix: np.ndarray
    sigma_tau: float


def j_of_tau(exp: ForestExpansion, tau: float) -> ParametricProximity:
    """Column-stochastic J(tau) = Q(tau) / sigma(tau) = (I + tau L)^-1."""
    s = sigma_of_tau(exp, tau)
    j = q_of_tau(exp, tau) / s
    return ParametricProximity(float(tau), j, s)


def j_k(exp: ForestExpansion, k: int) -> np.ndarray:
    if k < 0 or k > exp.max_arcs:
        raise IndexBeyondMaxForest(f"k = {k} outside 0..{exp.max_arcs}")
    if exp.sigma[k] <= 0:
        raise ZeroSigma(f"sigma_{k} is zero")
    return exp.q_matrices[k] / exp.sigma[k]


@dataclass(frozen=True)
class LimitingMatrix:
    j_tilde: np.ndarray


def j_tilde(exp: ForestExpansion) -> LimitingMatrix:
    """Stochastic matrix of maximum out-forests."""
    return LimitingMatrix(j_k(exp, exp.max_arcs))


def alpha_bound(exp: ForestExpansion) -> float:
    """Upper limit for the dense-forest parameter: sigma_{n-d'} / sigma_{n-d'-1}."""
    if exp.max_arcs == 0:
        raise UndefinedBound("the digraph has no arcs, so there is no next-to-maximum forest")
    return float(exp.sigma[exp.max_arcs] / exp.sigma[exp.max_arcs - 1])


def dense_forest_measure(jt: LimitingMatrix, exp: ForestExpansion, alpha: float) -> np.ndarray:
    """Matrix of dense out-forests, the inverse of ``I + alpha * J~``.

    Since J~ is idempotent the inverse equals ``I - alpha / (1 + alpha) * J~``;
    both routes are computed and must agree.
    """
    bound = alpha_bound(exp)
    if not 0 < alpha < bound:
        raise AlphaOutOfBounds(f"alpha = {alpha} outside (0, {bound:.6g})")
    n = exp.n
    eye = np.eye(n)
    closed = eye - (alpha / (1.0 + alpha)) * jt.j_tilde
    direct = np.linalg.inv(eye + alpha * jt.j_tilde)
    gap = float(np.abs(closed - direct).max())
    if gap > REWRITE_RTOL:
        raise NumericalBreakdown(f"dense-forest routes disagree by {gap:.3g}")
    return closed


def _check_tau(tau: float) -> None:
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
