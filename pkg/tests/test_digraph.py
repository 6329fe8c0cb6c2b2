import numpy as np
import pytest
from hypothesis import given, settings

from forestmat.digraph import (
    build_digraph,
    cutpoint_tensor,
    from_weight_matrix,
    is_cutpoint,
    laplacian,
    numerical_rank,
    reach_matrix,
    reachable,
    relabel,
    reverse,
    standard_numeration,
    strong_components,
    symmetrized,
    vertex_bases,
)
from forestmat.errors import (
    BasisCountOverflow,
    DegenerateTriple,
    LoopArc,
    NonpositiveWeight,
    TooFewVertices,
    VertexOutOfRange,
)

from conftest import digraphs


class TestBuild:
    def test_parallel_arcs_merge(self):
        g = build_digraph(2, [(1, 2, 1.5), (1, 2, 0.5)])
        assert g.arcs == ((1, 2, 2.0),)

    @pytest.mark.parametrize(
        "n, arcs, exc",
        [
            (1, [], TooFewVertices),
            (3, [(1, 1, 1)], LoopArc),
            (3, [(1, 4, 1)], VertexOutOfRange),
            (3, [(0, 2, 1)], VertexOutOfRange),
            (3, [(1, 2, 0)], NonpositiveWeight),
            (3, [(1, 2, -1)], NonpositiveWeight),
            (3, [(1, 2, float("nan"))], NonpositiveWeight),
        ],
    )
    def test_rejects(self, n, arcs, exc):
        with pytest.raises(exc):
            build_digraph(n, arcs)

    def test_weights_are_read_only(self, path):
        with pytest.raises(ValueError):
            path.weights[0, 0] = 1.0

    def test_equality_and_hash(self, path):
        other = from_weight_matrix(np.array(path.weights))
        assert other == path and hash(other) == hash(path)
        assert reverse(path) != path


def test_laplacian_of_path(path):
    expected = np.array([[0, -1, 0], [0, 1, -1], [0, 0, 1]], dtype=float)
    lap = laplacian(path)
    assert np.array_equal(lap, expected)
    assert not np.signbit(lap[lap == 0]).any()


@settings(max_examples=80, deadline=None)
@given(digraphs(max_n=7, integer=False))
def test_laplacian_columns_sum_to_zero(g):
    assert np.allclose(laplacian(g).sum(axis=0), 0.0, atol=1e-12)


def test_reverse_and_symmetrize(path):
    assert reverse(path).arcs == ((2, 1, 1.0), (3, 2, 1.0))
    s = symmetrized(path)
    assert np.array_equal(s.weights, s.weights.T)


def test_relabel(path):
    h = relabel(path, [3, 2, 1])
    assert h.arcs == ((2, 1, 1.0), (3, 2, 1.0))


def test_reachable(path):
    assert reachable(path, 1) == {1, 2, 3}
    assert reachable(path, 3) == {3}


@settings(max_examples=50, deadline=None)
@given(digraphs(max_n=7))
def test_reachable_matches_closure(g):
    r = reach_matrix(g)
    for i in range(1, g.n + 1):
        assert reachable(g, i) == {j + 1 for j in np.flatnonzero(r[i - 1])}


class TestCutpoints:
    def test_path(self, path):
        assert is_cutpoint(path, 2, 1, 3)
        assert not is_cutpoint(path, 2, 3, 1)

    def test_degenerate(self, path):
        with pytest.raises(DegenerateTriple):
            is_cutpoint(path, 2, 2, 3)

    @settings(max_examples=40, deadline=None)
    @given(digraphs(min_n=3, max_n=6))
    def test_tensor_matches_scalar(self, g):
        cut = cutpoint_tensor(g)
        for k in range(g.n):
            for i in range(g.n):
                for t in range(g.n):
                    if len({k, i, t}) == 3:
                        assert cut[k, i, t] == is_cutpoint(g, k + 1, i + 1, t + 1)
                    else:
                        assert not cut[k, i, t]


class TestKnots:
    def test_path(self, path):
        info = strong_components(path)
        assert info.source_knots == (frozenset({1}),)
        assert info.d_prime == 1
        assert info.exclusive_reach == (frozenset({1, 2, 3}),)

    def test_fork(self, fork):
        info = strong_components(fork)
        assert info.source_knots == (frozenset({1}), frozenset({2}))
        assert info.exclusive_reach == (frozenset({1}), frozenset({2}))
        assert info.knot_of(3) is None

    def test_cycle(self, cycle2):
        info = strong_components(cycle2)
        assert info.components == (frozenset({1, 2}),)
        assert info.d_prime == 1

    def test_arcless(self):
        assert strong_components(build_digraph(3, [])).d_prime == 3

    def test_vertex_bases(self):
        g = build_digraph(5, [(1, 2, 1), (2, 1, 1), (3, 4, 1), (4, 3, 1), (2, 5, 1)])
        assert set(vertex_bases(g)) == {frozenset(s) for s in ({1, 3}, {1, 4}, {2, 3}, {2, 4})}
        with pytest.raises(BasisCountOverflow):
            list(vertex_bases(g, cap=3))
        assert standard_numeration(g) == [1, 2, 3, 4, 5]

    @settings(max_examples=80, deadline=None)
    @given(digraphs(max_n=8, integer=False))
    def test_rank_of_laplacian(self, g):
        assert numerical_rank(laplacian(g)) == g.n - strong_components(g).d_prime

    @settings(max_examples=50, deadline=None)
    @given(digraphs(max_n=7))
    def test_knots_have_no_entering_arcs(self, g):
        info = strong_components(g)
        for knot in info.source_knots:
            outside = [v for v in range(1, g.n + 1) if v not in knot]
            for v in outside:
                for k in knot:
                    assert g.weights[v - 1, k - 1] == 0


def test_numerical_rank_threshold():
    assert numerical_rank(np.diag([1.0, 1e-12])) == 1
    assert numerical_rank(np.zeros((3, 3))) == 0
    assert numerical_rank(np.eye(4)) == 4
