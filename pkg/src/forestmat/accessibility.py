"""Forest-based accessibility measures and executable checks of their properties.

Every checker returns a :class:`Verdict` whose status is ``pass``,
``pass-nonstrict-only`` (the condition holds only with ``>`` relaxed to
``>=``) or ``fail``.  Non-passing verdicts carry a witness that
:func:`reproduce` can re-evaluate from scratch.

Conventions for the partitioned conditions (A applies to out-measures, B to
in-measures, B is A read on the transposed matrix):

* triangle inequality  (A) ``p_ik - p_ii <= p_kk - p_kt``
* monotonicity item 2  ``dp_ki > dp_ti`` when t cuts k from i, and
  ``dp_it > dp_ik`` when k cuts i from t
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .digraph import (
    WeightedDigraph,
    cutpoint_tensor,
    is_cutpoint,
    reach_matrix,
    reverse,
    strong_components,
)
from .errors import GraphTooLargeForConvexity
from .forests import dense_forest_measure, expansion_of, j_of_tau, j_tilde

ZERO_TOL = 1e-12
STRICT_RTOL = 1e-9
CONVEXITY_MAX_N = 12

PASS = "pass"
NONSTRICT = "pass-nonstrict-only"
FAIL = "fail"

KINDS = ("out", "in", "limiting_out", "limiting_in", "dense_out")


@dataclass(frozen=True)
class AccessibilityMatrix:
    p: np.ndarray
    kind: str
    param: float | None = None


def access_out(g: WeightedDigraph, tau: float) -> AccessibilityMatrix:
    return AccessibilityMatrix(j_of_tau(expansion_of(g), tau).j_matrix, "out", float(tau))


def access_in(g: WeightedDigraph, tau: float) -> AccessibilityMatrix:
    """In-accessibility, the dual of :func:`access_out` (transpose on the reversed digraph)."""
    return AccessibilityMatrix(access_out(reverse(g), tau).p.T, "in", float(tau))


def access_limiting(g: WeightedDigraph, direction: str = "out") -> AccessibilityMatrix:
    if direction == "out":
        return AccessibilityMatrix(j_tilde(expansion_of(g)).j_tilde, "limiting_out")
    if direction == "in":
        return AccessibilityMatrix(j_tilde(expansion_of(reverse(g))).j_tilde.T, "limiting_in")
    raise ValueError(f"direction must be 'out' or 'in', got {direction!r}")


def access_dense(g: WeightedDigraph, alpha: float) -> AccessibilityMatrix:
    exp = expansion_of(g)
    return AccessibilityMatrix(dense_forest_measure(j_tilde(exp), exp, alpha), "dense_out", float(alpha))


@dataclass(frozen=True)
class Measure:
    """A named measure with its parameter, callable on a digraph."""

    kind: str
    param: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown measure {self.kind!r}; expected one of {KINDS}")
        if self.kind in ("out", "in", "dense_out") and self.param is None:
            raise ValueError(f"measure {self.kind!r} needs a parameter")

    def __call__(self, g: WeightedDigraph) -> AccessibilityMatrix:
        if self.kind == "out":
            return access_out(g, self.param)
        if self.kind == "in":
            return access_in(g, self.param)
        if self.kind == "limiting_out":
            return access_limiting(g, "out")
        if self.kind == "limiting_in":
            return access_limiting(g, "in")
        return access_dense(g, self.param)

    @property
    def side(self) -> str | None:
        if self.kind in ("out", "limiting_out", "dense_out"):
            return "A"
        return "B"


@dataclass(frozen=True)
class Verdict:
    condition: str
    status: str
    witness: dict | None = None

    @property
    def ok(self) -> bool:
        return self.status != FAIL


def _margin(p: np.ndarray) -> float:
    return STRICT_RTOL * max(1.0, float(np.abs(p).max()))


def _verdict(condition: str, strict: bool, strict_bad, loose_bad) -> Verdict:
    """Fold the first strict and first nonstrict counterexamples into a verdict."""
    if loose_bad is not None:
        return Verdict(condition, FAIL, loose_bad)
    if strict and strict_bad is not None:
        return Verdict(condition, NONSTRICT, strict_bad)
    return Verdict(condition, PASS)


def _p(x: np.ndarray) -> np.ndarray:
    return x.p if isinstance(x, AccessibilityMatrix) else np.asarray(x, dtype=float)


def _v(*vertices: int) -> tuple[int, ...]:
    return tuple(int(v) + 1 for v in vertices)


def check_nonnegativity(P) -> Verdict:
    p = _p(P)
    bad = np.argwhere(p < -ZERO_TOL)
    if len(bad):
        i, j = bad[0]
        return Verdict("nonnegativity", FAIL, {"vertices": _v(i, j), "values": (float(p[i, j]),)})
    return Verdict("nonnegativity", PASS)


def check_reachability(P, g: WeightedDigraph, part: str) -> Verdict:
    """``forward``: p_ij = 0 implies j unreachable from i.
    ``backward``: j unreachable from i implies p_ij = 0."""
    p = _p(P)
    reach = reach_matrix(g)
    zero = np.abs(p) <= ZERO_TOL
    if part == "forward":
        bad = np.argwhere(zero & reach)
    elif part == "backward":
        bad = np.argwhere(~zero & ~reach)
    else:
        raise ValueError(f"part must be 'forward' or 'backward', got {part!r}")
    name = f"reachability_{part}"
    if len(bad):
        # report an off-diagonal pair when there is one
        i, j = sorted(bad.tolist(), key=lambda ij: ij[0] == ij[1])[0]
        return Verdict(name, FAIL, {"vertices": _v(i, j), "values": (float(p[i, j]),), "reachable": bool(reach[i, j])})
    return Verdict(name, PASS)


def _oriented(p: np.ndarray, variant: str) -> np.ndarray:
    if variant == "A":
        return p
    if variant == "B":
        return p.T
    raise ValueError(f"variant must be 'A' or 'B', got {variant!r}")


def check_self_accessibility(P, variant: str = "A", strict: bool = True) -> Verdict:
    """(A) p_ii > p_ij and (B) p_ii > p_ji for distinct i, j."""
    p = _p(P)
    q = _oriented(p, variant)
    m = _margin(p)
    n = len(q)
    strict_bad = loose_bad = None
    for i, j in itertools.permutations(range(n), 2):
        gap = q[i, i] - q[i, j]
        if gap < -m and loose_bad is None:
            loose_bad = {"vertices": _v(i, j), "values": (float(q[i, i]), float(q[i, j]))}
        if gap <= m and strict_bad is None:
            strict_bad = {"vertices": _v(i, j), "values": (float(q[i, i]), float(q[i, j]))}
    return _verdict(f"self_accessibility_{variant}", strict, strict_bad, loose_bad)


def check_triangle(P, variant: str = "A") -> Verdict:
    """(A) p_ik - p_ii <= p_kk - p_kt over all ordered triples; (B) is its transpose."""
    p = _p(P)
    q = _oriented(p, variant)
    m = _margin(p)
    d = np.diag(q)
    # lhs[i, k] = q_ik - q_ii ; rhs[k, t] = q_kk - q_kt
    lhs = q - d[:, None]
    rhs = d[:, None] - q
    excess = lhs[:, :, None] - rhs[None, :, :]
    bad = np.argwhere(excess > m)
    if len(bad):
        i, k, t = bad[0]
        return Verdict(
            f"triangle_{variant}",
            FAIL,
            {"vertices": _v(i, k, t), "values": (float(lhs[i, k]), float(rhs[k, t]))},
        )
    return Verdict(f"triangle_{variant}", PASS)


def check_transit(P, g: WeightedDigraph, variant: str = "A", strict: bool = True, cut: np.ndarray | None = None) -> Verdict:
    """If k cuts i from t: (A) p_ik > p_it, (B) p_kt > p_it."""
    if variant not in ("A", "B"):
        raise ValueError(f"variant must be 'A' or 'B', got {variant!r}")
    p = _p(P)
    cut = cutpoint_tensor(g) if cut is None else cut
    m = _margin(p)
    strict_bad = loose_bad = None
    for k, i, t in np.argwhere(cut):
        lhs = p[i, k] if variant == "A" else p[k, t]
        gap = lhs - p[i, t]
        w = {"vertices": _v(k, i, t), "values": (float(lhs), float(p[i, t]))}
        if gap < -m and loose_bad is None:
            loose_bad = w
        if gap <= m and strict_bad is None:
            strict_bad = w
    return _verdict(f"transit_{variant}", strict, strict_bad, loose_bad)


MONOTONICITY_ITEMS = ("1", "2", "3A", "3B")


def perturbed(g: WeightedDigraph, arc: tuple[int, int], delta: float) -> WeightedDigraph:
    """Copy of ``g`` with ``w_kt`` raised by ``delta`` (the arc is created if absent)."""
    k, t = arc
    if k == t:
        raise ValueError("monotonicity arc cannot be a loop")
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    w = np.array(g.weights)
    w[k - 1, t - 1] += delta
    w.setflags(write=False)
    return WeightedDigraph(g.n, w)


def check_monotonicity(
    measure: Measure,
    g: WeightedDigraph,
    arc: tuple[int, int],
    delta: float,
    item: str = "1",
    strict: bool = True,
    cut: np.ndarray | None = None,
    base: np.ndarray | None = None,
    after: np.ndarray | None = None,
) -> Verdict:
    """Increase ``w_kt`` by ``delta`` and test one numbered monotonicity item.

    Cutpoint premises are read off the unperturbed digraph.
    """
    if item not in MONOTONICITY_ITEMS:
        raise ValueError(f"item must be one of {MONOTONICITY_ITEMS}, got {item!r}")
    k, t = arc[0] - 1, arc[1] - 1
    p0 = measure(g).p if base is None else base
    p1 = measure(perturbed(g, arc, delta)).p if after is None else after
    dp = p1 - p0
    m = _margin(p0)
    cut = cutpoint_tensor(g) if cut is None else cut

    pairs: list[tuple[float, float, tuple[int, ...]]] = []
    if item == "1":
        pairs.append((dp[k, t], 0.0, (k, t)))
    elif item == "2":
        for i in np.flatnonzero(cut[t, k, :]):
            pairs.append((dp[k, i], dp[t, i], (k, t, i)))
        for i in np.flatnonzero(cut[k, :, t]):
            pairs.append((dp[i, t], dp[i, k], (k, t, i)))
    elif item == "3A":
        for i in np.flatnonzero(cut[t, k, :]):
            pairs.append((dp[k, t], dp[k, i], (k, t, i)))
    else:
        for i in np.flatnonzero(cut[k, :, t]):
            pairs.append((dp[k, t], dp[i, t], (k, t, i)))

    strict_bad = loose_bad = None
    for big, small, verts in pairs:
        gap = big - small
        w = {"vertices": _v(*verts), "values": (float(big), float(small)), "arc": tuple(arc), "delta": float(delta)}
        if gap < -m and loose_bad is None:
            loose_bad = w
        if gap <= m and strict_bad is None:
            strict_bad = w
    return _verdict(f"monotonicity_{item}", strict, strict_bad, loose_bad)


def _monotone_path(adj: np.ndarray, score: np.ndarray, start: int, end: int, strict: bool, m: float) -> list[int] | None:
    """Simple start->end path along which ``score`` strictly (or weakly) decreases."""
    n = len(adj)
    on_path = np.zeros(n, dtype=bool)
    path = [start]
    on_path[start] = True

    def step_ok(a: int, b: int) -> bool:
        return score[b] < score[a] - m if strict else score[b] <= score[a] + m

    def dfs(v: int) -> bool:
        if v == end:
            return True
        for u in np.flatnonzero(adj[v] & ~on_path):
            if not step_ok(v, u):
                continue
            on_path[u] = True
            path.append(int(u))
            if dfs(int(u)):
                return True
            path.pop()
            on_path[u] = False
        return False

    return list(path) if dfs(start) else None


def convexity_path(p: np.ndarray, g: WeightedDigraph, variant: str, k: int, i: int, strict: bool) -> list[int] | None:
    """Search the witness path for one (k, i) pair (0-based); None if there is none.

    (A) a k->i path with p_kj - p_ij strictly decreasing;
    (B) an i->k path with p_jk - p_ji strictly increasing.
    """
    m = _margin(p)
    adj = g.adjacency
    if variant == "A":
        return _monotone_path(adj, p[k, :] - p[i, :], k, i, strict, m)
    return _monotone_path(adj, -(p[:, k] - p[:, i]), i, k, strict, m)


def check_convexity(P, g: WeightedDigraph, variant: str = "A", strict: bool = True) -> Verdict:
    """(A) if p_ki > p_ii (i != k) some k->i path has p_kj - p_ij strictly
    decreasing in j; (B) if p_ik > p_ii some i->k path has p_jk - p_ji strictly
    increasing."""
    if g.n > CONVEXITY_MAX_N:
        raise GraphTooLargeForConvexity(f"convexity search is exponential; n = {g.n} > {CONVEXITY_MAX_N}")
    if variant not in ("A", "B"):
        raise ValueError(f"variant must be 'A' or 'B', got {variant!r}")
    p = _p(P)
    m = _margin(p)
    strict_bad = loose_bad = None
    for i, k in itertools.permutations(range(g.n), 2):
        prem = p[k, i] if variant == "A" else p[i, k]
        if not prem > p[i, i] + m:
            continue
        w = {"vertices": _v(k, i), "values": (float(prem), float(p[i, i]))}
        if convexity_path(p, g, variant, k, i, strict=True) is not None:
            continue
        if strict_bad is None:
            strict_bad = w
        if convexity_path(p, g, variant, k, i, strict=False) is None:
            loose_bad = w
            break
    return _verdict(f"convexity_{variant}", strict, strict_bad, loose_bad)


CONDITIONS = (
    "nonnegativity",
    "reachability_forward",
    "reachability_backward",
    "self_accessibility_A",
    "self_accessibility_B",
    "triangle_A",
    "triangle_B",
    "transit_A",
    "transit_B",
    "monotonicity_1",
    "monotonicity_2",
    "monotonicity_3A",
    "monotonicity_3B",
    "convexity_A",
    "convexity_B",
)

UNPARTITIONED = ("nonnegativity", "reachability_forward", "reachability_backward", "monotonicity_1", "monotonicity_2")


def _side(side: str) -> tuple[str, ...]:
    return (
        f"self_accessibility_{side}",
        f"triangle_{side}",
        f"transit_{side}",
        f"monotonicity_3{side}",
        f"convexity_{side}",
    )


def expected_profile(measure: Measure) -> dict[str, set[str]] | None:
    """Statuses each condition may take for this measure, or None if no claim is made."""
    if measure.kind in ("out", "in"):
        return {c: {PASS} for c in UNPARTITIONED + _side(measure.side)}
    if measure.kind in ("limiting_out", "limiting_in"):
        s = measure.side
        loose = {PASS, NONSTRICT}
        return {
            "nonnegativity": {PASS},
            "reachability_backward": {PASS},
            f"self_accessibility_{s}": loose,
            f"transit_{s}": loose,
            "monotonicity_1": loose,
            "monotonicity_2": loose,
            f"monotonicity_3{s}": loose,
            f"convexity_{s}": loose,
            f"triangle_{s}": {PASS},
        }
    return None


def default_plan(g: WeightedDigraph) -> list[tuple[tuple[int, int], float]]:
    """Raise every arc by half its weight; add a unit arc between each pair of source knots."""
    plan = [((i, j), w / 2.0) for i, j, w in g.arcs]
    knots = strong_components(g).source_knots
    for a, b in itertools.combinations(knots, 2):
        k, t = min(a), min(b)
        if g.weights[k - 1, t - 1] == 0:
            plan.append(((k, t), 1.0))
    return plan


def _worst(name: str, verdicts: Iterable[Verdict]) -> Verdict:
    rank = {PASS: 0, NONSTRICT: 1, FAIL: 2}
    best = Verdict(name, PASS)
    for v in verdicts:
        if rank[v.status] > rank[best.status]:
            best = v
    return best


@dataclass(frozen=True)
class AuditReport:
    measure: Measure
    verdicts: tuple[Verdict, ...]
    profile: dict[str, set[str]] | None = field(default=None, repr=False)

    def __getitem__(self, condition: str) -> Verdict:
        for v in self.verdicts:
            if v.condition == condition:
                return v
        raise KeyError(condition)

    @property
    def mismatches(self) -> list[str]:
        if self.profile is None:
            return []
        return [c for c, allowed in self.profile.items() if self[c].status not in allowed]

    @property
    def profile_ok(self) -> bool | None:
        return None if self.profile is None else not self.mismatches


def audit(
    measure: Measure,
    g: WeightedDigraph,
    plan: list[tuple[tuple[int, int], float]] | None = None,
    convexity: bool = True,
) -> AuditReport:
    """Run every checker on ``measure(g)`` and compare with the expected profile."""
    p = measure(g).p
    cut = cutpoint_tensor(g)
    plan = default_plan(g) if plan is None else plan
    out: list[Verdict] = [
        check_nonnegativity(p),
        check_reachability(p, g, "forward"),
        check_reachability(p, g, "backward"),
        check_self_accessibility(p, "A"),
        check_self_accessibility(p, "B"),
        check_triangle(p, "A"),
        check_triangle(p, "B"),
        check_transit(p, g, "A", cut=cut),
        check_transit(p, g, "B", cut=cut),
    ]
    moved = [(arc, delta, measure(perturbed(g, arc, delta)).p) for arc, delta in plan]
    for item in MONOTONICITY_ITEMS:
        out.append(
            _worst(
                f"monotonicity_{item}",
                (
                    check_monotonicity(measure, g, arc, delta, item, cut=cut, base=p, after=p1)
                    for arc, delta, p1 in moved
                ),
            )
        )
    if convexity and g.n <= CONVEXITY_MAX_N:
        out.append(check_convexity(p, g, "A"))
        out.append(check_convexity(p, g, "B"))
    else:
        out.append(Verdict("convexity_A", PASS, {"skipped": True}))
        out.append(Verdict("convexity_B", PASS, {"skipped": True}))
    return AuditReport(measure, tuple(out), expected_profile(measure))


def reproduce(verdict: Verdict, measure: Measure, g: WeightedDigraph) -> bool:
    """Re-evaluate a verdict's witness from scratch; True if the recorded
    violation (strict or nonstrict, per the status) shows up again."""
    if verdict.status == PASS or not verdict.witness:
        return False
    loose = verdict.status == FAIL
    name = verdict.condition
    p = measure(g).p
    m = _margin(p)
    vs = [v - 1 for v in verdict.witness["vertices"]]

    def broken(big: float, small: float) -> bool:
        return big - small < -m if loose else big - small <= m

    if name == "nonnegativity":
        i, j = vs
        return p[i, j] < -ZERO_TOL
    if name.startswith("reachability"):
        i, j = vs
        reach = reach_matrix(g)[i, j]
        zero = abs(p[i, j]) <= ZERO_TOL
        return (zero and reach) if name.endswith("forward") else (not zero and not reach)
    if name.startswith("self_accessibility"):
        q = _oriented(p, name[-1])
        i, j = vs
        return broken(q[i, i], q[i, j])
    if name.startswith("triangle"):
        q = _oriented(p, name[-1])
        i, k, t = vs
        return (q[i, k] - q[i, i]) - (q[k, k] - q[k, t]) > m
    if name.startswith("transit"):
        k, i, t = vs
        if not is_cutpoint(g, k + 1, i + 1, t + 1):
            return False
        lhs = p[i, k] if name.endswith("A") else p[k, t]
        return broken(lhs, p[i, t])
    if name.startswith("monotonicity"):
        arc, delta = verdict.witness["arc"], verdict.witness["delta"]
        item = name.split("_")[1]
        v = check_monotonicity(measure, g, arc, delta, item)
        return v.status == verdict.status and v.witness is not None
    if name.startswith("convexity"):
        k, i = vs
        return convexity_path(p, g, name[-1], k, i, strict=not loose) is None
    raise ValueError(f"unknown condition {name!r}")
