"""Bayesian stochastic block model inference with a non-asymptotic
model-selection bound, exact tiny-graph certification, and a synthetic
benchmark harness."""

from .bench import BenchConfig, ConfusionMatrix, run_bench
from .engine import (
    FitOptions,
    FitResult,
    NumericalError,
    Priors,
    VariationalState,
    fit,
    ilvb,
    lower_bound_general,
    lower_bound_simplified,
    map_labels,
)
from .generate import SbmParams, affiliation_matrix, hub_matrix, sample_sbm
from .graph import Graph, GraphParseError, load_adjacency_csv, load_edge_list, write_edge_list
from .initializers import InitConfig, init_resp, kmeans_then_ward, ward_init, ward_tree
from .oracle import CapacityError, OracleLimits, exact_complete_log, exact_log_marginal
from .selection import SelectionConfig, SelectionReport, fit_freq, icl, select_q

__version__ = "0.1.0"

__all__ = [
    "BenchConfig",
    "CapacityError",
    "ConfusionMatrix",
    "FitOptions",
    "FitResult",
    "Graph",
    "GraphParseError",
    "InitConfig",
    "NumericalError",
    "OracleLimits",
    "Priors",
    "SbmParams",
    "SelectionConfig",
    "SelectionReport",
    "VariationalState",
    "affiliation_matrix",
    "exact_complete_log",
    "exact_log_marginal",
    "fit",
    "fit_freq",
    "hub_matrix",
    "icl",
    "ilvb",
    "init_resp",
    "kmeans_then_ward",
    "load_adjacency_csv",
    "load_edge_list",
    "lower_bound_general",
    "lower_bound_simplified",
    "map_labels",
    "run_bench",
    "sample_sbm",
    "select_q",
    "ward_init",
    "ward_tree",
    "write_edge_list",
]
