"""Spanning-forest matrices of weighted digraphs."""

from ._kernels import backend
from .accessibility import (
    AccessibilityMatrix,
    AuditReport,
    Measure,
    Verdict,
    access_dense,
    access_in,
    access_limiting,
    access_out,
    audit,
)
from .digraph import (
    SourceKnotInfo,
    WeightedDigraph,
    build_digraph,
    from_weight_matrix,
    is_cutpoint,
    laplacian,
    reachable,
    standard_numeration,
    strong_components,
    vertex_bases,
)
from .errors import DataError, ForestMatError, NumericalError, ParseError
from .forests import (
    ForestExpansion,
    alpha_bound,
    dense_forest_measure,
    expansion_of,
    forest_expansion,
    j_k,
    j_of_tau,
    j_tilde,
)
from .markov import cesaro_limit, inverse_chain, limit_deviation, simulate_dissemination, uniform_start_limit
from .oracle import enumerate_in_forests, enumerate_out_forests, exact_j_tilde, oracle_expansion
from .ranking import borda_scores, daniels_tree_scores, kernel_basis, mean_limit_scores, rank

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
