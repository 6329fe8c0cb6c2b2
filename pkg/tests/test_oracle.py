from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from forestmat.digraph import build_digraph, reach_matrix, reverse, strong_components
from forestmat.errors import EnumerationCapExceeded, NotASourceKnot
from forestmat.forests import expansion_of, j_tilde
from forestmat.accessibility import access_in
from forestmat.oracle import (
    enumerate_in_forests,
    enumerate_out_forests,
    exact_j_tilde,
    exact_weight,
    forest_weight,
    in_forest_proximity,
    knot_tree_weights,
    max_forest_reach_weight,
    oracle_expansion,
    oracle_expansion_batch,
)

from conftest import digraphs


def test_path_forests(path):
    forests = enumerate_out_forests(path)
    assert sorted(f.arcs for f in forests) == [(), ((1, 2),), ((1, 2), (2, 3)), ((2, 3),)]
    full = [f for f in forests if len(f.arcs) == 2][0]
    assert full.roots == {1} and full.tree_of == {1: 1, 2: 1, 3: 1}


def test_in_forests_mirror(path):
    ins = enumerate_in_forests(path)
    assert len(ins) == 4
    full = [f for f in ins if len(f.arcs) == 2][0]
    assert full.roots == {3} and full.tree_of == {1: 3, 2: 3, 3: 3}


def test_cycle_rejects_circuit(cycle2):
    assert len(enumerate_out_forests(cycle2)) == 3


def test_arcless():
    assert len(enumerate_out_forests(build_digraph(3, []))) == 1


def test_expansion_examples(path):
    oe = oracle_expansion(path)
    assert oe.sigma_exact == [1, 2, 1]
    assert oe.q_exact[2][0][2] == 1
    oe = oracle_expansion(build_digraph(2, [(1, 2, 3)]))
    assert oe.sigma_exact == [1, 3]
    assert oe.q_exact[1] == [[3, 3], [0, 0]]


def test_exact_weight():
    assert exact_weight(2.0) == 2 and isinstance(exact_weight(2.0), int)
    assert exact_weight(0.1) == Fraction(1, 10)


def test_cap():
    g = build_digraph(4, [(i, j, 1) for i in range(1, 5) for j in range(1, 5) if i != j])
    with pytest.raises(EnumerationCapExceeded):
        enumerate_out_forests(g, cap=100)


def test_knot_tree_weights(cycle2):
    assert knot_tree_weights(cycle2, {1, 2}) == (3, {1: 2, 2: 1})
    tri = build_digraph(3, [(1, 2, 1), (2, 3, 1), (3, 1, 1)])
    assert knot_tree_weights(tri, {1, 2, 3}) == (3, {1: 1, 2: 1, 3: 1})
    fork = build_digraph(3, [(1, 3, 1), (2, 3, 1)])
    assert knot_tree_weights(fork, {1}) == (1, {1: 1})
    with pytest.raises(NotASourceKnot):
        knot_tree_weights(fork, {3})


def test_max_forest_reach_weight(fork, path):
    assert max_forest_reach_weight(fork, {1}, 3) == 1
    assert max_forest_reach_weight(fork, {1}, 1) == 2
    assert max_forest_reach_weight(path, {1}, 2) == 1


@settings(max_examples=60, deadline=None)
@given(digraphs(max_n=5))
def test_engine_matches_oracle(g):
    exp = expansion_of(g)
    oe = oracle_expansion(g)
    assert oe.max_arcs == exp.max_arcs
    top = exp.max_arcs
    assert np.allclose(exp.sigma[: top + 1], oe.sigma_float()[: top + 1], rtol=1e-9, atol=0)
    q = oe.q_float()
    for k in range(top + 1):
        assert np.allclose(exp.q_matrices[k], q[k], rtol=1e-9, atol=1e-9)
    assert not q[top + 1 :].any()


@settings(max_examples=60, deadline=None)
@given(digraphs(max_n=5))
def test_forest_sanity(g):
    oe = oracle_expansion(g)
    for k, qk in enumerate(oe.q_exact):
        for j in range(g.n):
            assert sum(qk[i][j] for i in range(g.n)) == oe.sigma_exact[k]
    for f in enumerate_out_forests(g):
        assert len(f.roots) == g.n - len(f.arcs)
        heads = [b for _, b in f.arcs]
        assert len(heads) == len(set(heads))
        assert f.roots == set(range(1, g.n + 1)) - set(heads)


@settings(max_examples=40, deadline=None)
@given(digraphs(max_n=5))
def test_reversal_preserves_weights(g):
    outs = sorted(forest_weight(reverse(g), f) for f in enumerate_out_forests(reverse(g)))
    ins = sorted(
        np.prod([exact_weight(g.weights[a - 1, b - 1]) for a, b in f.arcs], dtype=object) if f.arcs else 1
        for f in enumerate_in_forests(g)
    )
    assert outs == ins


@settings(max_examples=40, deadline=None)
@given(digraphs(max_n=5))
def test_in_forest_proximity_matches_engine(g):
    exact = np.array(in_forest_proximity(g), dtype=float)
    assert np.allclose(exact, access_in(g, 1.0).p, atol=1e-12)
    assert np.allclose(exact.sum(axis=1), 1.0)


@settings(max_examples=40, deadline=None)
@given(digraphs(max_n=4))
def test_batch_oracle_matches_single(g):
    w = g.weights.astype(np.int64)[None]
    sigma, q = oracle_expansion_batch(w)
    oe = oracle_expansion(g)
    assert sigma[0].tolist() == oe.sigma_exact
    assert q[0].tolist() == oe.q_exact


@settings(max_examples=50, deadline=None)
@given(digraphs(max_n=5))
def test_knot_identities(g):
    info = strong_components(g)
    jt = exact_j_tilde(g)
    top = oracle_expansion(g)
    s_top = top.sigma_exact[top.max_arcs]
    reach = reach_matrix(g)
    knot_union = info.knot_union
    for i in range(g.n):
        for j in range(g.n):
            assert (jt[i][j] != 0) == ((i + 1) in knot_union and bool(reach[i, j]))
    for knot, plus in zip(info.source_knots, info.exclusive_reach):
        total, per_root = knot_tree_weights(g, knot)
        assert sum(jt[k - 1][k - 1] for k in knot) == 1
        for k in knot:
            for j in range(1, g.n + 1):
                assert jt[k - 1][j - 1] * s_top == per_root[k] * max_forest_reach_weight(g, knot, j)
            for j in plus:
                assert jt[k - 1][j - 1] == Fraction(per_root[k]) / total
    float_jt = j_tilde(expansion_of(g)).j_tilde
    assert np.allclose(float_jt, np.array(jt, dtype=float), rtol=1e-9, atol=1e-12)
