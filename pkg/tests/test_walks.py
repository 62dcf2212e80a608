import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qdecay.arch import ParallelLayer
from qdecay.walks import (
    audit_segments, color_tree_edges, coloring_to_layers, is_proper_coloring, segment_walk, spanning_tree,
    traversing_walk,
)


def test_spanning_tree_examples():
    t = nx.path_graph(4)
    assert set(map(frozenset, spanning_tree(t).edges)) == set(map(frozenset, t.edges))
    st_cycle = spanning_tree(nx.cycle_graph(5))
    assert nx.is_tree(st_cycle) and st_cycle.number_of_edges() == 4
    k5 = nx.complete_graph(5)
    for i, (a, b) in enumerate(k5.edges):
        k5[a][b]["weight"] = 0.1 * (i + 1)
    tree = spanning_tree(k5)
    assert tree.number_of_edges() == 4
    for a, b, w in tree.edges(data="weight"):
        assert k5.has_edge(a, b) and k5[a][b]["weight"] == w
    with pytest.raises(ValueError):
        spanning_tree(nx.Graph([(0, 1), (2, 3)]))


def test_spanning_tree_keeps_heavy_edges():
    g = nx.Graph()
    g.add_weighted_edges_from([(0, 1, 0.5), (1, 2, 0.4), (0, 2, 0.1)])
    tree = spanning_tree(g)
    assert min(w for *_, w in tree.edges(data="weight")) == 0.4
    tree = spanning_tree([(0, 1), (1, 2)])
    assert tree.number_of_edges() == 2


def test_traversing_walk_examples():
    assert traversing_walk(nx.Graph([(1, 2), (2, 3)])).node_sequence == [1, 2, 3]
    star = nx.Graph([("c", "a"), ("c", "b"), ("c", "d")])
    walk = traversing_walk(star)
    assert walk.node_sequence == ["a", "c", "b", "c", "d"]
    assert walk.visit_counts["c"] == 2 <= walk.max_degree
    single = nx.Graph()
    single.add_node(0)
    assert traversing_walk(single).node_sequence == [0]
    with pytest.raises(ValueError):
        traversing_walk(nx.cycle_graph(4))


def _check_walk(tree, walk):
    seq = walk.node_sequence
    assert all(tree.has_edge(a, b) for a, b in zip(seq, seq[1:]))
    assert set(seq) == set(tree.nodes)
    for v in tree.nodes:
        assert 1 <= walk.visit_counts[v] <= max(tree.degree[v], 1) <= walk.max_degree or tree.number_of_nodes() == 1


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 50), st.integers(0, 2**31 - 1))
def test_traversing_walk_random_trees(n, seed):
    tree = nx.random_labeled_tree(n, seed=seed)
    _check_walk(tree, traversing_walk(tree))


@pytest.mark.parametrize("ell", [2, 3, 4, 5, 6])
def test_traversing_walk_by_max_degree(ell):
    # balanced-ish trees whose max degree is exactly ell
    tree = nx.balanced_tree(ell - 1, 3)
    assert max(d for _, d in tree.degree) == ell
    walk = traversing_walk(tree)
    _check_walk(tree, walk)
    assert max(walk.visit_counts.values()) <= ell


def test_segment_examples():
    tree = nx.path_graph(10)
    plan = segment_walk(traversing_walk(tree), 3)
    assert [len(s) for s in plan.segments] == [3, 3, 3, 1]
    plan = segment_walk(traversing_walk(tree), 20)
    assert len(plan.segments) == 1
    plan = segment_walk(traversing_walk(nx.path_graph(16)), 4)
    audit = audit_segments(plan)
    assert audit["ok"]
    for s in range(len(plan.segments) - 1):
        assert plan.segments[s].sites & plan.segments[s + 1].sites
    with pytest.raises(ValueError):
        segment_walk(traversing_walk(tree), 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 40), st.integers(1, 12), st.integers(0, 2**31 - 1))
def test_segments_random(n, target, seed):
    tree = nx.random_labeled_tree(n, seed=seed)
    plan = segment_walk(traversing_walk(tree), target)
    audit = audit_segments(plan)
    assert audit["ok"], audit
    for i in range(len(plan.segments) - 1):
        g = nx.Graph(plan.pair_edges(i))
        g.add_nodes_from(plan.pair_sites(i))
        assert nx.is_connected(g)


def test_coloring_examples():
    path = [(0, 1), (1, 2), (2, 3), (3, 4)]
    colors = color_tree_edges(path)
    assert len(colors) == 2 and is_proper_coloring(colors)
    assert colors == [[(0, 1), (2, 3)], [(1, 2), (3, 4)]]
    star = [(0, i) for i in range(1, 5)]
    colors = color_tree_edges(star)
    assert len(colors) == 4 and is_proper_coloring(colors)
    assert color_tree_edges([]) == []
    with pytest.raises(ValueError):
        color_tree_edges([(0, 1), (1, 2), (2, 0)])


def test_coloring_repeats_and_layers():
    colors = color_tree_edges([(0, 1), (1, 0), (1, 2), (0, 1)])
    assert sum(map(len, colors)) == 2
    layers = coloring_to_layers(colors)
    assert all(isinstance(layer, ParallelLayer) for layer in layers)
    assert not is_proper_coloring([[(0, 1), (1, 2)]])


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 30), st.integers(0, 2**31 - 1))
def test_coloring_random_trees(n, seed):
    tree = nx.random_labeled_tree(n, seed=seed)
    colors = color_tree_edges(list(tree.edges))
    ell = max(d for _, d in tree.degree)
    assert is_proper_coloring(colors) and len(colors) <= ell
    covered = sorted(tuple(sorted(e)) for layer in colors for e in layer)
    assert covered == sorted(tuple(sorted(e)) for e in tree.edges)
