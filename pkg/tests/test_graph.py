import os
from pathlib import Path

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netrecon.graph import (Graph, GeneratorParams, GraphError, circulant_seed, clustering_coefficient,
                            condensed_index, degree_stats, epidemic_threshold, generate, load_dataset,
                            load_edge_list, local_clustering, ring_lattice, stats_row, write_edge_list)
from netrecon.similarity import pairs_from_condensed


def _nx(g):
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges)
    return h


def test_triangle_from_text():
    g = load_edge_list("1 2\n2 3\n3 1\n")
    assert g.n == 3 and g.num_edges == 3
    assert clustering_coefficient(g) == 1.0
    assert g.labels == ("1", "2", "3")


def test_duplicates_and_self_loops_dropped():
    g = load_edge_list("a b\nb a\na b\nc c\nb c\n")
    assert g.n == 3
    assert g.edges == ((0, 1), (1, 2))


def test_comments_and_extra_columns():
    text = "% konect header\n# another\n\n1 2 1 946684800\n2 3 1\n"
    g = load_edge_list(text)
    assert g.num_edges == 2


def test_dense_ids_keep_isolated_nodes():
    g = load_edge_list("0 4\n", id_mode="dense")
    assert g.n == 5 and g.num_edges == 1
    assert g.degrees.tolist() == [1, 0, 0, 0, 1]


@pytest.mark.parametrize("text,fragment", [
    ("1 2\n3\n", "line 2"),
    ("", "no edges"),
    ("% only comments\n", "no edges"),
])
def test_malformed_inputs(text, fragment):
    with pytest.raises(GraphError, match=fragment):
        load_edge_list(text)


def test_dense_rejects_non_integer():
    with pytest.raises(GraphError):
        load_edge_list("a b\n", id_mode="dense")


def test_file_path_and_roundtrip(tmp_path):
    g = generate(GeneratorParams("sw", 30, 4, p=0.2, seed=3))
    path = tmp_path / "g.edges"
    with open(path, "w") as fh:
        write_edge_list(g, fh)
    h = load_edge_list(path, id_mode="dense")
    assert h.edges == g.edges
    assert load_edge_list(str(path), id_mode="dense").edges == g.edges


def test_zachary_bundled():
    g = load_dataset("zkc")
    assert (g.n, g.num_edges) == (34, 78)
    ref = nx.karate_club_graph()
    assert clustering_coefficient(g) == pytest.approx(nx.average_clustering(ref), abs=1e-12)
    with pytest.raises(GraphError):
        load_dataset("nope")


def test_condensed_index_matches_enumeration():
    n = 7
    expected = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for k, (i, j) in enumerate(expected):
        assert condensed_index(n, i, j) == k
    i, j = pairs_from_condensed(n, np.arange(len(expected)))
    assert list(zip(i.tolist(), j.tolist())) == expected


def test_edge_mask():
    g = Graph.from_edges(4, [(0, 3), (2, 1)])
    mask = g.edge_mask()
    assert mask.sum() == 2
    assert mask[condensed_index(4, 0, 3)] and mask[condensed_index(4, 1, 2)]
    assert g.has_edge(3, 0) and not g.has_edge(0, 1)


# -- generators --------------------------------------------------------------

def test_ba_complete_seed_edge_count():
    # m0 = k + 1 gives a complete seed K_{m0}
    n, k = 200, 4
    g = generate(GeneratorParams("ba", n, k, m0=k + 1, seed=1))
    assert g.meta["E_seed"] == (k + 1) * k // 2
    assert g.num_edges == (k + 1) * k // 2 + (n - k - 1) * k


def test_ba_default_seed_configuration():
    g = generate(GeneratorParams("ba", 500, 5, m0=9, seed=1))
    assert g.meta["E_seed"] == 18 and g.meta["seed_degree"] == 4
    assert g.num_edges == 18 + (500 - 9) * 5
    assert g.degrees.min() >= 4
    assert nx.is_connected(_nx(g))


@pytest.mark.parametrize("m0,k,d", [(9, 5, 4), (6, 5, 5), (6, 3, 3), (7, 3, 2), (4, 8, 3)])
def test_circulant_seed_regular(m0, k, d):
    edges = circulant_seed(m0, k)
    deg = np.bincount(np.asarray(edges).ravel(), minlength=m0)
    assert set(deg.tolist()) == {d}


def test_ba_infeasible():
    with pytest.raises(GraphError):
        generate(GeneratorParams("ba", 100, 6, m0=5))
    with pytest.raises(GraphError):
        generate(GeneratorParams("ba", 5, 2, m0=5))


def test_sw_lattice_at_p0():
    g = generate(GeneratorParams("sw", 50, 4, p=0.0, seed=0))
    assert set(g.degrees.tolist()) == {4}
    assert g.num_edges == 100
    assert clustering_coefficient(g) == pytest.approx(0.5)


@pytest.mark.parametrize("k", [4, 5])
@pytest.mark.parametrize("p", [0.1, 0.5, 1.0])
def test_sw_preserves_edge_count(k, p):
    n = 101 if k == 5 else 100
    g = generate(GeneratorParams("sw", n, k, p=p, seed=7))
    assert g.num_edges == len(ring_lattice(n, k))


def test_sw_odd_k_mean_degree():
    g = generate(GeneratorParams("sw", 500, 5, p=0.0))
    assert g.degrees.mean() == pytest.approx(5.0)


def test_generators_deterministic():
    for model in ("ba", "sw"):
        a = generate(GeneratorParams(model, 300, 4, m0=6, seed=11))
        b = generate(GeneratorParams(model, 300, 4, m0=6, seed=11))
        c = generate(GeneratorParams(model, 300, 4, m0=6, seed=12))
        assert a.edges == b.edges
        assert a.edges != c.edges


def test_sw_invalid():
    with pytest.raises(GraphError):
        generate(GeneratorParams("sw", 5, 6))
    with pytest.raises(GraphError):
        generate(GeneratorParams("sw", 50, 4, p=1.5))
    with pytest.raises(GraphError):
        generate(GeneratorParams("er", 50, 4))


# -- statistics --------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(st.integers(3, 40), st.floats(0.05, 0.6), st.integers(0, 10_000))
def test_clustering_matches_networkx(n, p, seed):
    h = nx.gnp_random_graph(n, p, seed=seed)
    g = Graph.from_edges(n, h.edges())
    ref = nx.clustering(h)
    np.testing.assert_allclose(local_clustering(g), [ref[i] for i in range(n)], atol=1e-12)
    assert clustering_coefficient(g) == pytest.approx(nx.average_clustering(h), abs=1e-12)


def test_star_threshold():
    # degrees 2, 1, 1: <k> = 4/3, <k^2> = 2
    g = Graph.from_edges(3, [(0, 1), (0, 2)])
    assert epidemic_threshold(g) == pytest.approx(2.0)


@pytest.mark.parametrize("k", [3, 4, 6])
def test_regular_threshold(k):
    g = Graph.from_edges(20, nx.random_regular_graph(k, 20, seed=1).edges())
    assert epidemic_threshold(g) == pytest.approx(1 / (k - 1))


def test_threshold_undefined():
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    assert degree_stats(g).beta_c is None
    with pytest.raises(GraphError):
        epidemic_threshold(g)


def test_stats_row():
    row = stats_row("tri", load_edge_list("0 1\n1 2\n2 0\n"))
    assert row == ["tri", 3, 3, "2", "1", "1"]


def test_ba_triangle_seed_count():
    g = generate(GeneratorParams("ba", 10, 2, m0=3, seed=0))
    assert g.num_edges == 3 + 7 * 2


@pytest.mark.parametrize("m0", [3, 4, 6])
def test_ba_one_new_node_completes_graph(m0):
    g = generate(GeneratorParams("ba", m0 + 1, m0, m0=m0, seed=0))
    assert g.num_edges == (m0 + 1) * m0 // 2


@pytest.mark.parametrize("p", [0.0, 1.0])
def test_sw_small_edge_count(p):
    g = generate(GeneratorParams("sw", 10, 4, p=p, seed=2))
    assert g.num_edges == 20


def test_path_and_triangle_statistics():
    path = Graph.from_edges(3, [(0, 1), (1, 2)])
    tri = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    assert clustering_coefficient(path) == 0.0
    assert epidemic_threshold(tri) == pytest.approx(1.0)


def test_star_k14_threshold():
    g = Graph.from_edges(5, [(0, k) for k in range(1, 5)])
    assert epidemic_threshold(g) == pytest.approx(2 / 3)


def test_jazz_clustering_when_available():
    root = Path(os.environ.get("NETRECON_DATA_DIR", Path(__file__).parent / "data"))
    found = [p for p in root.glob("*jazz*") if p.is_file()] if root.is_dir() else []
    if not found:
        pytest.skip(f"jazz edge list not present under {root}")
    g = load_edge_list(found[0])
    assert (g.n, g.num_edges) == (198, 2742)
    assert clustering_coefficient(g) == pytest.approx(0.62, abs=0.01)
