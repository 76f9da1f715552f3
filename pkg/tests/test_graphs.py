"""Graph model, generators, and the unique-weight transform."""

import random

import pytest

from asyncmst.graphs import (
    Edge, WeightedGraph, components, generate_graph, load_graph,
    make_weights_unique, save_graph,
)


def test_transform_matches_worked_example():
    # edge (3,2), w=5, id bit-length 2 -> 5*16 + 3*4 + 2 = 94
    g = WeightedGraph([2, 3], [Edge(3, 2, 5, 0)])
    out = make_weights_unique(g)
    assert out.edges[0].wu == 94


def test_transform_separates_equal_weights():
    g = WeightedGraph([1, 2, 3], [Edge(2, 1, 7, 0), Edge(3, 1, 7, 0)])
    out = make_weights_unique(g)
    wus = [e.wu for e in out.edges]
    assert len(set(wus)) == 2


def test_transform_preserves_order_of_distinct_weights():
    rng = random.Random(20)
    for trial in range(25):
        g = generate_graph("gnp", 20, seed=trial, p=0.4)
        # distinct raw weights must sort identically under raw and unique order
        raw_distinct = [e for e in g.edges
                        if sum(1 for f in g.edges if f.w == e.w) == 1]
        by_raw = sorted(raw_distinct, key=lambda e: e.w)
        by_unique = sorted(raw_distinct, key=lambda e: e.wu)
        assert by_raw == by_unique
    del rng


@pytest.mark.parametrize("family,n,expect_m", [("complete", 4, 6), ("path", 5, 4)])
def test_generator_edge_counts(family, n, expect_m):
    g = generate_graph(family, n, seed=0)
    assert g.m == expect_m


def test_path_diameter():
    from asyncmst.oracles import diameter
    g = generate_graph("path", 5, seed=3)
    assert diameter(g) == 4


def test_gnp_deterministic_for_fixed_seed():
    a = generate_graph("gnp", 64, seed=1, p=0.5)
    b = generate_graph("gnp", 64, seed=1, p=0.5)
    assert a.ids == b.ids
    assert [e.pair for e in a.edges] == [e.pair for e in b.edges]
    assert [e.wu for e in a.edges] == [e.wu for e in b.edges]


def test_gnp_rejects_bad_probability():
    with pytest.raises(ValueError):
        generate_graph("gnp", 8, seed=0, p=0.0)
    with pytest.raises(ValueError):
        generate_graph("gnp", 8, seed=0, p=1.5)


def test_generated_graphs_always_connected_and_unique_weights():
    for seed in range(40):
        for family, n in (("gnp", 24), ("barbell", 20), ("grid", 25), ("path", 9)):
            g = generate_graph(family, n, seed=seed, p=0.05)
            assert g.n == n
            assert g.is_connected()
            wus = [e.wu for e in g.edges]
            assert len(set(wus)) == len(wus)
            assert all(1 <= i <= n ** 3 for i in g.ids)


def test_uniqueness_over_many_seeded_graphs():
    # invariant batch: transform output is pairwise-distinct across 1000 graphs
    count = 0
    for seed in range(1000):
        g = generate_graph("gnp", 12, seed=seed, p=0.3)
        wus = [e.wu for e in g.edges]
        assert len(set(wus)) == len(wus)
        count += 1
    assert count == 1000


def test_components_of_induced_subgraph():
    g = generate_graph("path", 6, seed=5)
    order = g.meta["path_order"]
    sub = set(order[:2]) | set(order[3:5])
    comps = components(g, sub)
    assert sorted(len(c) for c in comps) == [2, 2]


def test_graph_file_round_trip(tmp_path):
    g = generate_graph("gnp", 16, seed=9, p=0.4)
    path = tmp_path / "g.txt"
    save_graph(g, str(path))
    back = load_graph(str(path))
    assert back.ids == g.ids
    assert {e.pair for e in back.edges} == {e.pair for e in g.edges}
    assert {(e.pair, e.w) for e in back.edges} == {(e.pair, e.w) for e in g.edges}


def test_loader_validates(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("2 1\n5 5 3\n")
    with pytest.raises(ValueError):
        load_graph(str(bad))
