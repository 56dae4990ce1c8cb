from .graphs import (
    ConcatenatedGraph,
    GraphValidationError,
    LabelledMultigraph,
    check_assumptions,
    concatenate,
    naive_exponent,
)
from .trees import (
    ClusterTree,
    EtaAssignment,
    TieError,
    build_eta,
    cluster_tree,
    mrca,
    tree_sum_estimate,
    verify_tree_conditions,
)
from .dyadic import ConvolutionHypothesisError, convolution_exponents, dyadic_decompose

__all__ = [
    "LabelledMultigraph",
    "ConcatenatedGraph",
    "GraphValidationError",
    "concatenate",
    "check_assumptions",
    "naive_exponent",
    "ClusterTree",
    "EtaAssignment",
    "TieError",
    "cluster_tree",
    "mrca",
    "build_eta",
    "verify_tree_conditions",
    "tree_sum_estimate",
    "convolution_exponents",
    "ConvolutionHypothesisError",
    "dyadic_decompose",
]
