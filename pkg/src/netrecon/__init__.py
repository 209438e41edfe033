"""Reconstructing hidden contact networks from spreading time-series."""

__version__ = "0.1.0"

from .graph import (Graph, GraphError, GeneratorParams, clustering_coefficient, epidemic_threshold,
                    generate_ba, generate_sw, load_dataset, load_edge_list)
from .spreading import CascadeSet, SpreadParams, run_cascades, simulate_ltm, simulate_si, simulate_sir
from .similarity import (ALL_METRICS, MetricSpec, SimilarityScores, adoption_count, kernel_weight,
                         similarity_matrix, similarity_scores, weighted_coadoption)
from .evaluation import auc, mean_rank, mean_relative_precision, precision_at_e, relative_difference

__all__ = [
    "Graph", "GraphError", "GeneratorParams", "clustering_coefficient", "epidemic_threshold",
    "generate_ba", "generate_sw", "load_dataset", "load_edge_list",
    "CascadeSet", "SpreadParams", "run_cascades", "simulate_ltm", "simulate_si", "simulate_sir",
    "ALL_METRICS", "MetricSpec", "SimilarityScores", "adoption_count", "kernel_weight",
    "similarity_matrix", "similarity_scores", "weighted_coadoption",
    "auc", "mean_rank", "mean_relative_precision", "precision_at_e", "relative_difference",
]
