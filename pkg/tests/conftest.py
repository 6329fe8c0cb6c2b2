from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from forestmat.digraph import WeightedDigraph, build_digraph

FIXTURES = Path(__file__).parent / "fixtures"


def path_graph() -> WeightedDigraph:
    return build_digraph(3, [(1, 2, 1), (2, 3, 1)])


def fork_graph() -> WeightedDigraph:
    return build_digraph(3, [(1, 3, 1), (2, 3, 1)])


def two_cycle() -> WeightedDigraph:
    return build_digraph(2, [(1, 2, 2), (2, 1, 1)])


def random_digraph(
    rng: np.random.Generator, n: int, density: float = 0.4, weights=(1, 2, 3), uniform=None
) -> WeightedDigraph:
    """Random loop-free digraph; weights are drawn from ``weights``, or from
    the real interval ``uniform = (low, high)`` when that is given."""
    mask = rng.random((n, n)) < density
    np.fill_diagonal(mask, False)
    if uniform is None:
        w = rng.choice(np.asarray(weights, dtype=float), size=(n, n))
    else:
        w = rng.uniform(*uniform, size=(n, n))
    tails, heads = np.nonzero(mask)
    return build_digraph(n, [(i + 1, j + 1, w[i, j]) for i, j in zip(tails, heads)])


def random_graphs(count: int, n_max: int, seed: int, n_min: int = 2, **kw) -> list[WeightedDigraph]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(n_min, n_max + 1))
        out.append(random_digraph(rng, n, density=float(rng.uniform(0.15, 0.7)), **kw))
    return out


@st.composite
def digraphs(draw, min_n: int = 2, max_n: int = 6, integer: bool = True):
    n = draw(st.integers(min_n, max_n))
    pairs = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != j]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs)))
    if integer:
        wt = st.integers(1, 3).map(float)
    else:
        wt = st.floats(0.1, 5.0, allow_nan=False, allow_infinity=False)
    return build_digraph(n, [(i, j, draw(wt)) for i, j in chosen])


@pytest.fixture
def path():
    return path_graph()


@pytest.fixture
def fork():
    return fork_graph()


@pytest.fixture
def cycle2():
    return two_cycle()


# ---------------------------------------------------------------------------
# acceptance bookkeeping: one PASS/FAIL line per criterion
# ---------------------------------------------------------------------------

ACCEPTANCE: dict[int, str] = {}


class _Criterion:
    def __init__(self, number: int, title: str):
        self.number, self.title = number, title

    def __enter__(self):
        import time

        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        import time

        took = time.perf_counter() - self.start
        verdict = "PASS" if exc_type is None else "FAIL"
        line = f"criterion {self.number:2d} {verdict}  {self.title}  ({took:.1f} s)"
        if exc is not None:
            line += f"  -- {exc_type.__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        ACCEPTANCE[self.number] = line
        print(line)
        return False


@pytest.fixture
def criterion():
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
