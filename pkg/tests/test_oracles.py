"""Sequential oracle checks: MST, spanning-forest, hop distances, diameter."""

import random

from asyncmst.graphs import Edge, WeightedGraph, generate_graph, make_weights_unique
from asyncmst.oracles import (
    bfs_distances, diameter, forest_weight, minimum_spanning_forest, mst_prim,
    random_spanning_tree,
)


def _triangle():
    g = WeightedGraph([1, 2, 3],
                      [Edge(2, 1, 1, 0), Edge(3, 2, 2, 0), Edge(3, 1, 3, 0)])
    return make_weights_unique(g)


def test_triangle_drops_heaviest_cycle_edge():
    g = _triangle()
    forest, labels = minimum_spanning_forest(g)
    assert forest == {(2, 1), (3, 2)}
    assert len(set(labels.values())) == 1


def test_tree_input_returns_all_edges():
    g = generate_graph("path", 7, seed=2)
    forest, _ = minimum_spanning_forest(g)
    assert forest == {e.pair for e in g.edges}


def test_kruskal_agrees_with_prim():
    g = generate_graph("gnp", 32, seed=7, p=0.3)
    kr, labels = minimum_spanning_forest(g)
    assert len(set(labels.values())) == 1
    assert kr == mst_prim(g)


def test_disconnected_input_gets_component_labels():
    g = make_weights_unique(WeightedGraph(
        [1, 2, 3, 4], [Edge(2, 1, 1, 0), Edge(4, 3, 2, 0)]))
    forest, labels = minimum_spanning_forest(g)
    assert len(forest) == 2
    assert len(set(labels.values())) == 2


def test_mst_not_heavier_than_random_spanning_trees():
    g = generate_graph("gnp", 24, seed=11, p=0.35)
    forest, _ = minimum_spanning_forest(g)
    best = forest_weight(g, forest)
    rng = random.Random(99)
    for _ in range(1000):
        t = random_spanning_tree(g, rng)
        assert forest_weight(g, t) >= best
    # spanning and acyclic
    assert len(forest) == g.n - 1


def test_bfs_path_distances():
    g = generate_graph("path", 5, seed=4)
    order = g.meta["path_order"]
    d = bfs_distances(g, order[0])
    assert [d[u] for u in order] == [0, 1, 2, 3, 4]


def test_bfs_complete_all_within_one_hop():
    g = generate_graph("complete", 9, seed=1)
    d = bfs_distances(g, g.ids[0])
    assert set(d.values()) == {0, 1}


def test_grid_8x8_diameter_14():
    g = generate_graph("grid", 64, seed=0)
    # brute-force all-pairs hop distances
    brute = 0
    for u in g.ids:
        dd = bfs_distances(g, u)
        brute = max(brute, max(dd.values()))
    assert brute == 14
    assert diameter(g) == 14


def test_bfs_triangle_property_on_edges():
    for seed in range(10):
        g = generate_graph("gnp", 40, seed=seed, p=0.15)
        d = bfs_distances(g, g.ids[0])
        for e in g.edges:
            assert abs(d[e.hi] - d[e.lo]) <= 1


def test_unreachable_nodes_flagged_by_absence():
    g = make_weights_unique(WeightedGraph(
        [1, 2, 3], [Edge(2, 1, 5, 0)]))
    d = bfs_distances(g, 1)
    assert 3 not in d and d[2] == 1
