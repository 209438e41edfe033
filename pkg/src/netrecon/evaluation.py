"""Scoring reconstructions against the hidden graph."""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.stats import rankdata

from .graph import Graph, condensed_index
from .similarity import SimilarityScores


def _explicit_with_truth(scores: SimilarityScores, truth: Graph):
    """Stored scores, their edge flags, and the size / edge count of the implicit zero block."""
    if scores.n != truth.n:
        raise ValueError(f"score node count {scores.n} != graph node count {truth.n}")
    keys, vals = scores.explicit()
    if scores.is_sparse:
        edge_keys = np.sort(condensed_index(truth.n, *np.asarray(truth.edges, dtype=np.int64).T)) \
            if truth.edges else np.zeros(0, np.int64)
        is_edge = np.isin(keys, edge_keys, assume_unique=True)
        zero_block = scores.num_pairs - keys.size
        zero_edges = truth.num_edges - int(is_edge.sum())
    else:
        is_edge = truth.edge_mask()
        zero_block = zero_edges = 0
    return vals, is_edge, zero_block, zero_edges


def precision_at_e(scores: SimilarityScores, truth: Graph) -> float:
    """Expected fraction of true edges among the ``E`` top-scored pairs.

    Ties at the cutoff are resolved by their expectation under a uniformly
    random order, so the result is deterministic.
    """
    if truth.n < 2:
        raise ValueError("precision needs at least two nodes")
    E = truth.num_edges
    if E < 1:
        raise ValueError("precision needs a graph with at least one edge")
    vals, is_edge, zero_block, zero_edges = _explicit_with_truth(scores, truth)

    if E <= vals.size:
        cutoff = np.partition(vals, vals.size - E)[vals.size - E]
    else:
        cutoff = 0.0
    above = vals > cutoff
    tied = vals == cutoff
    n_above = int(above.sum())
    n_tied = int(tied.sum())
    hits_above = int(is_edge[above].sum())
    hits_tied = int(is_edge[tied].sum())
    if cutoff == 0.0:
        n_tied += zero_block
        hits_tied += zero_edges
    slots = E - n_above
    return (hits_above + slots * hits_tied / n_tied) / E


def auc(scores: SimilarityScores, truth: Graph, samples: int | None = None,
        rng: np.random.Generator | None = None) -> float:
    """Probability that a random edge outscores a random non-edge (ties count 1/2).

    Exact over all pairs by default; with ``samples`` set, estimated from that
    many independent (edge, non-edge) draws.
    """
    n_pairs = truth.n * (truth.n - 1) // 2
    n_pos = truth.num_edges
    n_neg = n_pairs - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs at least one edge and one non-edge")
    if samples is not None:
        return _sampled_auc(scores, truth, samples, rng or np.random.default_rng())

    vals, is_edge, zero_block, zero_edges = _explicit_with_truth(scores, truth)
    if zero_block:
        vals = np.concatenate([vals, [0.0]])
        pos_w = np.concatenate([is_edge.astype(np.int64), [zero_edges]])
        all_w = np.concatenate([np.ones(vals.size - 1, np.int64), [zero_block]])
    else:
        pos_w = is_edge.astype(np.int64)
        all_w = np.ones(vals.size, np.int64)
    uniq, inv = np.unique(vals, return_inverse=True)
    pos = np.bincount(inv, weights=pos_w, minlength=uniq.size).astype(np.int64)
    neg = np.bincount(inv, weights=all_w, minlength=uniq.size).astype(np.int64) - pos
    neg_below = np.cumsum(neg) - neg
    # twice the Mann-Whitney U, kept in integers
    u2 = int(np.sum(pos * (2 * neg_below + neg), dtype=np.int64))
    return u2 / (2 * n_pos * n_neg)


def _sampled_auc(scores, truth, samples, rng) -> float:
    edges = np.asarray(truth.edges, dtype=np.int64)
    pick = edges[rng.integers(len(edges), size=samples)]
    pos_scores = scores.values_at(condensed_index(truth.n, pick[:, 0], pick[:, 1]))
    edge_keys = np.sort(condensed_index(truth.n, edges[:, 0], edges[:, 1]))
    n_pairs = truth.n * (truth.n - 1) // 2
    neg_keys = np.empty(0, dtype=np.int64)
    while neg_keys.size < samples:
        draw = rng.integers(n_pairs, size=samples)
        draw = draw[~np.isin(draw, edge_keys)]
        neg_keys = np.concatenate([neg_keys, draw])
    neg_scores = scores.values_at(neg_keys[:samples])
    return float(np.mean((pos_scores > neg_scores) + 0.5 * (pos_scores == neg_scores)))


def relative_difference(p_a: float, p_b: float) -> float:
    """``(p_a - p_b) / p_b``; NaN when ``p_b`` is not positive."""
    if p_b is None or p_a is None or not p_b > 0:
        return math.nan
    return (p_a - p_b) / p_b


def mean_rank(table) -> np.ndarray:
    """Mean over datasets (rows) of each metric's rank by decreasing precision.

    Ties share their average rank.
    """
    table = np.asarray(table, dtype=np.float64)
    if table.ndim != 2 or table.shape[0] < 1:
        raise ValueError("precision table must be datasets x metrics with at least one dataset")
    if np.isnan(table).any():
        raise ValueError("precision table has missing cells")
    ranks = rankdata(-table, method="average", axis=1)
    return ranks.mean(axis=0)


def mean_relative_precision(table) -> np.ndarray:
    """Mean over datasets of each metric's precision divided by the dataset best."""
    table = np.asarray(table, dtype=np.float64)
    if table.ndim != 2:
        raise ValueError("precision table must be datasets x metrics")
    best = table.max(axis=1)
    keep = best > 0
    if not keep.all():
        warnings.warn(f"excluding {int((~keep).sum())} dataset(s) where every metric has zero precision",
                      stacklevel=2)
    if not keep.any():
        raise ValueError("no dataset with positive precision")
    return (table[keep] / best[keep, None]).mean(axis=0)
