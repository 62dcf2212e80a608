"""Spanning trees, traversing walks on trees, walk segmentation and tree edge colouring."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import networkx as nx

from .arch import ParallelLayer


def _as_graph(graph) -> nx.Graph:
    if isinstance(graph, nx.Graph):
        return graph
    g = nx.Graph()
    for e in graph:
        if len(e) == 3:
            g.add_edge(e[0], e[1], weight=e[2])
        else:
            g.add_edge(e[0], e[1], weight=1.0)
    return g


def spanning_tree(graph) -> nx.Graph:
    """Maximum-weight spanning tree (edge attribute ``weight``, default 1).

    Maximising weight also maximises the smallest edge weight kept, which is
    what the decay bound for random gates on graphs depends on.
    """
    g = _as_graph(graph)
    if g.number_of_nodes() == 0 or not nx.is_connected(g):
        raise ValueError("spanning_tree needs a connected, non-empty graph")
    return nx.maximum_spanning_tree(g, weight="weight")


@dataclass
class TraversingWalk:
    node_sequence: list
    tree: nx.Graph
    visit_counts: Counter = field(init=False)

    def __post_init__(self):
        self.visit_counts = Counter(self.node_sequence)

    @property
    def max_degree(self) -> int:
        return max((d for _, d in self.tree.degree), default=0)

    def __len__(self):
        return len(self.node_sequence)


def traversing_walk(tree: nx.Graph, root=None) -> TraversingWalk:
    """Depth-first walk that covers every node of a tree.

    This is an Euler tour of the doubled tree started at a leaf (or ``root``)
    and cut short after the last leaf: the tallest subtree is explored last
    and never walked back out of.  Node ``v`` appears at most ``deg(v)`` times.
    """
    if tree.number_of_nodes() == 0:
        raise ValueError("empty tree")
    if not nx.is_tree(tree):
        raise ValueError("traversing_walk needs a tree")
    if tree.number_of_nodes() == 1:
        return TraversingWalk(list(tree.nodes), tree)
    if root is None:
        root = min((v for v in tree.nodes if tree.degree[v] == 1), key=str)
    height = {}
    for v in nx.dfs_postorder_nodes(tree, root):
        height[v] = max((height[u] + 1 for u in tree.neighbors(v) if u in height), default=0)
    walk = []
    # (action, node, parent, on_final_branch); only the final branch never walks back
    stack = [("visit", root, None, True)]
    while stack:
        action, v, parent, final = stack.pop()
        walk.append(v)
        if action == "emit":
            continue
        children = sorted((u for u in tree.neighbors(v) if u != parent), key=lambda u: (height[u], str(u)))
        todo = []
        for i, u in enumerate(children):
            last = final and i == len(children) - 1
            todo.append(("visit", u, v, last))
            if not last:
                todo.append(("emit", v, None, False))
        stack.extend(reversed(todo))
    return TraversingWalk(walk, tree)


@dataclass
class Segment:
    nodes: list
    edges: list
    sites: set

    def __len__(self):
        return len(self.nodes)


@dataclass
class SegmentPlan:
    segments: list[Segment]
    target_length: int
    walk: TraversingWalk

    def pair_sites(self, s: int) -> set:
        """Sites of ``W_s + W_{s+1}``."""
        return self.segments[s].sites | self.segments[s + 1].sites

    def pair_edges(self, s: int) -> list:
        return self.segments[s].edges + self.segments[s + 1].edges


def segment_walk(walk: TraversingWalk, target_len: int) -> SegmentPlan:
    """Cut the walk's node sequence into consecutive slices of ``target_len`` nodes.

    A segment owns the walk steps leaving each of its nodes, including the step
    into the next segment, so consecutive segments share that step's endpoint.
    """
    if target_len < 1:
        raise ValueError("target_len must be >= 1")
    seq = walk.node_sequence
    segments = []
    for start in range(0, len(seq), target_len):
        nodes = seq[start:start + target_len]
        stop = min(start + target_len, len(seq) - 1)
        edges = [(seq[t], seq[t + 1]) for t in range(start, stop)]
        sites = set(nodes).union(*(set(e) for e in edges)) if edges else set(nodes)
        segments.append(Segment(list(nodes), edges, sites))
    return SegmentPlan(segments, target_len, walk)


def _connected(nodes: Iterable, edges: Sequence) -> bool:
    g = nx.Graph()
    g.add_nodes_from(nodes)
    g.add_edges_from(edges)
    return g.number_of_nodes() > 0 and nx.is_connected(g)


def audit_segments(plan: SegmentPlan) -> dict:
    """Check the connectivity properties the gluing step needs."""
    tree = plan.walk.tree
    ell = max(plan.walk.max_degree, 1)
    segs = plan.segments
    flat = [v for s in segs for v in s.nodes]
    result = {
        "partition": flat == list(plan.walk.node_sequence) and all(len(s) > 0 for s in segs),
        "lengths": all(len(s) == plan.target_length for s in segs[:-1]) and len(segs[-1]) <= plan.target_length,
        "edges_in_tree": all(tree.has_edge(a, b) for s in segs for a, b in s.edges),
        "segment_connected": all(_connected(s.sites, s.edges) for s in segs),
        "pairs_connected": all(_connected(plan.pair_sites(i), plan.pair_edges(i)) for i in range(len(segs) - 1)),
        "linked": all(segs[i].sites & segs[i + 1].sites for i in range(len(segs) - 1)),
        "site_counts": all(len(s) / ell <= len(s.sites) <= len(s) + 1 for s in segs),
    }
    result["ok"] = all(result.values())
    return result


def color_tree_edges(edges) -> list[list[tuple]]:
    """Proper edge colouring of a forest with at most max-degree colours.

    Repeated edges are ignored.  Colours are assigned root to leaf, each edge
    avoiding its parent edge's colour.  Returns one edge list per colour.
    """
    g = nx.Graph()
    g.add_edges_from((a, b) for a, b, *_ in edges)
    if g.number_of_edges() == 0:
        return []
    if not nx.is_forest(g):
        raise ValueError("color_tree_edges needs a forest")
    color = {}
    for comp in nx.connected_components(g):
        root = min(comp, key=str)
        parent_color = {root: None}
        for parent, child in nx.bfs_edges(g, root):
            used = {color[frozenset((parent, u))] for u in g.neighbors(parent)
                    if frozenset((parent, u)) in color}
            c = 0
            while c in used or c == parent_color[parent]:
                c += 1
            color[frozenset((parent, child))] = c
            parent_color[child] = c
    layers: dict[int, list] = {}
    for e, c in color.items():
        layers.setdefault(c, []).append(tuple(sorted(e, key=str)))
    return [sorted(layers[c], key=str) for c in sorted(layers)]


def coloring_to_layers(colors: list[list[tuple]]) -> list[ParallelLayer]:
    return [ParallelLayer(tuple(tuple(e) for e in layer)) for layer in colors]


def is_proper_coloring(colors: list[list[tuple]]) -> bool:
    for layer in colors:
        seen = set()
        for a, b in layer:
            if a in seen or b in seen:
                return False
            seen.update((a, b))
    return True
