import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netrecon.evaluation import auc, mean_rank, mean_relative_precision, precision_at_e, relative_difference
from netrecon.graph import Graph, condensed_index
from netrecon.similarity import SimilarityScores

from oracles import brute_auc, brute_precision


def _pairs(n):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def _scores(n, d):
    """Dense scores from a ``{(i, j): value}`` dict, zero elsewhere."""
    v = np.zeros(n * (n - 1) // 2)
    for (i, j), s in d.items():
        v[condensed_index(n, i, j)] = s
    return SimilarityScores(n, v)


def _as_sparse(s):
    nz = np.flatnonzero(s.values)
    return SimilarityScores(s.n, s.values[nz], nz)


def _random_graph(rng, n, E):
    pairs = _pairs(n)
    pick = rng.choice(len(pairs), size=E, replace=False)
    return Graph.from_edges(n, [pairs[k] for k in pick])


TRIANGLE_IN_4 = Graph.from_edges(4, [(0, 1), (1, 2), (0, 2)])


def test_precision_perfect():
    g = TRIANGLE_IN_4
    assert precision_at_e(SimilarityScores(4, g.edge_mask().astype(float)), g) == 1.0


def test_precision_all_tied_is_density():
    g = TRIANGLE_IN_4
    assert precision_at_e(SimilarityScores(4, np.full(6, 0.3)), g) == pytest.approx(3 / 6)
    assert precision_at_e(SimilarityScores(4, np.zeros(6)), g) == pytest.approx(3 / 6)


def test_precision_hand_count():
    # top-3 strictly: 01, 12, 03; two of them are edges
    s = _scores(4, {(0, 1): 3.0, (1, 2): 2.0, (0, 3): 1.5, (0, 2): 0.5})
    assert precision_at_e(s, TRIANGLE_IN_4) == pytest.approx(2 / 3)


def test_precision_tie_at_cutoff():
    # one sure edge above, then two slots among three tied pairs holding one edge
    s = _scores(4, {(0, 1): 2.0, (1, 2): 1.0, (0, 3): 1.0, (1, 3): 1.0})
    assert precision_at_e(s, TRIANGLE_IN_4) == pytest.approx((1 + 2 / 3) / 3)


def test_precision_errors():
    with pytest.raises(ValueError):
        precision_at_e(SimilarityScores(3, np.zeros(3)), Graph.from_edges(3, []))
    with pytest.raises(ValueError):
        precision_at_e(SimilarityScores(4, np.zeros(6)), Graph.from_edges(3, [(0, 1)]))


def test_auc_perfect_and_tied():
    g = Graph.from_edges(3, [(0, 1), (0, 2)])
    assert auc(_scores(3, {(0, 1): 2.0, (0, 2): 1.0}), g) == 1.0
    assert auc(SimilarityScores(3, np.full(3, 7.0)), g) == 0.5


def test_auc_hand_count():
    # edges scored {3, 1}; non-edges scored {2, 0} twice over
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    s = _scores(4, {(0, 1): 3.0, (2, 3): 1.0, (0, 2): 2.0, (1, 3): 2.0})
    assert auc(s, g) == 0.75
    assert auc(_as_sparse(s), g) == 0.75


def test_auc_errors():
    with pytest.raises(ValueError):
        auc(SimilarityScores(3, np.zeros(3)), Graph.from_edges(3, []))
    with pytest.raises(ValueError):
        auc(SimilarityScores(3, np.zeros(3)), Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)]))


@st.composite
def scored_graphs(draw):
    n = draw(st.integers(3, 9))
    P = n * (n - 1) // 2
    E = draw(st.integers(1, P - 1))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    g = _random_graph(rng, n, E)
    # few distinct values so ties are common
    vals = rng.integers(0, draw(st.integers(1, 4)), size=P).astype(float)
    return g, SimilarityScores(n, vals)


@settings(max_examples=40, deadline=None)
@given(scored_graphs())
def test_precision_matches_random_tie_breaking(case):
    g, s = case
    d = {p: s.score(*p) for p in _pairs(g.n)}
    mc = brute_precision(d, set(g.edges), g.num_edges, np.random.default_rng(0), 20_000)
    assert precision_at_e(s, g) == pytest.approx(mc, abs=0.01)


@settings(max_examples=80, deadline=None)
@given(scored_graphs())
def test_auc_matches_pairwise_count(case):
    g, s = case
    d = {p: s.score(*p) for p in _pairs(g.n)}
    assert auc(s, g) == pytest.approx(brute_auc(d, set(g.edges)), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(scored_graphs(), st.floats(0.5, 4.0), st.floats(0.0, 10.0))
def test_monotone_transform_invariance(case, scale, shift):
    g, s = case
    t = SimilarityScores(g.n, s.values * 2)
    u = SimilarityScores(g.n, s.values * scale + shift)
    for other in (t, u):
        assert abs(precision_at_e(other, g) - precision_at_e(s, g)) <= 1e-12
        assert abs(auc(other, g) - auc(s, g)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(scored_graphs())
def test_sparse_scores_evaluate_like_dense(case):
    g, s = case
    sp = _as_sparse(s)
    assert precision_at_e(sp, g) == pytest.approx(precision_at_e(s, g), abs=1e-12)
    assert auc(sp, g) == pytest.approx(auc(s, g), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(scored_graphs())
def test_outputs_in_unit_interval(case):
    g, s = case
    assert 0.0 <= precision_at_e(s, g) <= 1.0
    assert 0.0 <= auc(s, g) <= 1.0


def test_sampled_auc_close_to_exact():
    rng = np.random.default_rng(4)
    g = _random_graph(rng, 60, 200)
    s = SimilarityScores(60, rng.random(60 * 59 // 2) + 0.5 * g.edge_mask())
    exact = auc(s, g)
    est = auc(s, g, samples=50_000, rng=np.random.default_rng(1))
    assert est == pytest.approx(exact, abs=0.01)
    assert est == auc(s, g, samples=50_000, rng=np.random.default_rng(1))


def test_relative_difference():
    assert relative_difference(0.5, 0.5) == 0.0
    assert relative_difference(0.6, 0.5) == pytest.approx(0.2)
    assert relative_difference(0.236, 0.235) == pytest.approx(0.00426, abs=5e-6)
    assert math.isnan(relative_difference(0.3, 0.0))


def test_mean_rank_examples():
    assert mean_rank([[0.9, 0.5, 0.1], [0.8, 0.2, 0.3]])[0] == 1.0
    np.testing.assert_array_equal(mean_rank([[0.4, 0.4, 0.1]]), [1.5, 1.5, 3.0])
    # ranks 2 and 4 across two datasets
    table = [[0.3, 0.9, 0.2, 0.1], [0.1, 0.9, 0.8, 0.7]]
    assert mean_rank(table)[0] == 3.0


def test_mean_rank_errors():
    with pytest.raises(ValueError):
        mean_rank([[0.1, float("nan")]])
    with pytest.raises(ValueError):
        mean_rank(np.zeros((0, 3)))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(1, 8), st.integers(0, 10_000))
def test_mean_rank_bounds_and_rank_sums(D, S, seed):
    rng = np.random.default_rng(seed)
    table = rng.integers(0, 4, size=(D, S)) / 4
    r = mean_rank(table)
    assert (r >= 1).all() and (r <= S).all()
    assert r.sum() == pytest.approx(S * (S + 1) / 2)


def test_mean_relative_precision_examples():
    np.testing.assert_allclose(mean_relative_precision([[0.2, 0.4]]), [0.5, 1.0])
    rel = mean_relative_precision([[0.3, 0.6], [0.5, 0.5]])
    assert rel[0] == pytest.approx(0.75)
    assert rel[1] == 1.0


def test_mean_relative_precision_excludes_all_zero_dataset():
    with pytest.warns(UserWarning, match="excluding 1"):
        rel = mean_relative_precision([[0.2, 0.4], [0.0, 0.0]])
    np.testing.assert_allclose(rel, [0.5, 1.0])
    with pytest.warns(UserWarning), pytest.raises(ValueError):
        mean_relative_precision([[0.0, 0.0]])
