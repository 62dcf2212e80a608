"""Random-circuit architectures: generators, cluster graphs, Hamiltonian paths
and the two overlapping chunkings of a cluster path.

Sites are integers ``0..n-1``.  Lattice sites are numbered in C order of their
coordinates.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx
import numpy as np


@dataclass(frozen=True)
class ParallelLayer:
    """Disjoint clusters, each twirled independently."""

    clusters: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "clusters", tuple(tuple(sorted(int(s) for s in c)) for c in self.clusters))

    kind = "parallel"


@dataclass(frozen=True)
class UnstructuredLayer:
    """One gate per step on edge ``(i, j)`` with probability ``p``."""

    edges: tuple[tuple[int, int, float], ...]
    measure: str = "haar"

    kind = "unstructured"

    @property
    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_weighted_edges_from(self.edges)
        return g


@dataclass(frozen=True)
class ArchitectureSpec:
    n: int
    q: int
    layers: tuple
    cluster_bound: int | None = None
    family: str | None = None
    params: dict = field(default_factory=dict, compare=False)

    @property
    def sites(self) -> range:
        return range(self.n)


class ArchitectureError(ValueError):
    """Invalid architecture; ``problems`` lists ``(json_path, message)`` pairs."""

    def __init__(self, problems: list[tuple[str, str]]):
        self.problems = problems
        super().__init__("; ".join(f"{p}: {m}" for p, m in problems))


def validate(spec: ArchitectureSpec) -> list[tuple[str, str]]:
    """All invariant violations of ``spec`` as ``(json_path, message)`` pairs."""
    problems = []
    covered = set()
    if spec.n < 1:
        problems.append(("$.n", "n must be >= 1"))
    if spec.q < 2:
        problems.append(("$.q", "q must be >= 2"))
    for li, layer in enumerate(spec.layers):
        base = f"$.layers[{li}]"
        if isinstance(layer, ParallelLayer):
            seen = {}
            for ci, c in enumerate(layer.clusters):
                path = f"{base}.clusters[{ci}]"
                if len(c) < 2:
                    problems.append((path, "cluster needs at least 2 sites"))
                if spec.cluster_bound is not None and len(c) > spec.cluster_bound:
                    problems.append((path, f"cluster larger than bound c={spec.cluster_bound}"))
                for s in c:
                    if not 0 <= s < spec.n:
                        problems.append((path, f"site {s} out of range"))
                    elif s in seen:
                        problems.append((path, f"site {s} also in cluster {seen[s]} of the same layer"))
                    else:
                        seen[s] = ci
                covered.update(c)
        elif isinstance(layer, UnstructuredLayer):
            total = 0.0
            for ei, (i, j, p) in enumerate(layer.edges):
                path = f"{base}.edges[{ei}]"
                if i == j:
                    problems.append((path, "self-loop"))
                if not (0 <= i < spec.n and 0 <= j < spec.n):
                    problems.append((path, "endpoint out of range"))
                if p < 0:
                    problems.append((path, "negative probability"))
                total += p
                covered.update((i, j))
            if abs(total - 1) > 1e-9:
                problems.append((f"{base}.edges", f"probabilities sum to {total}, expected 1"))
        else:
            problems.append((base, f"unknown layer type {type(layer).__name__}"))
    missing = sorted(set(range(spec.n)) - covered)
    if missing:
        problems.append(("$.layers", f"sites {missing} are in no cluster or edge"))
    return problems


def brickwork(n: int, q: int = 2) -> ArchitectureSpec:
    """1-D brickwork: pairs (0,1),(2,3),... then (1,2),(3,4),..."""
    if n < 3:
        raise ValueError("brickwork needs n >= 3")
    l1 = ParallelLayer(tuple((i, i + 1) for i in range(0, n - 1, 2)))
    l2 = ParallelLayer(tuple((i, i + 1) for i in range(1, n - 1, 2)))
    return ArchitectureSpec(n, q, (l1, l2), cluster_bound=2, family="brickwork", params={"n": n})


def lattice(D: int, side: int, q: int = 2) -> ArchitectureSpec:
    """Periodic ``D``-dimensional lattice of ``side**D`` sites twirled in unit hypercubes.

    Layer 1 tiles from the origin, layer 2 from the all-ones corner, wrapping
    around the boundary.  Cluster ``c`` of either layer is indexed by its
    corner coordinates divided by 2.
    """
    if D < 1:
        raise ValueError("D must be >= 1")
    if side < 4 or side % 2:
        raise ValueError("side must be even and >= 4 so that unit hypercubes tile the torus")
    shape = (side,) * D
    corners = list(itertools.product(range(0, side, 2), repeat=D))
    offsets = list(itertools.product((0, 1), repeat=D))

    def cube(corner, shift):
        return tuple(sorted(int(np.ravel_multi_index(tuple((c + shift + o) % side for c, o in zip(corner, off)), shape))
                            for off in offsets))

    l1 = ParallelLayer(tuple(cube(c, 0) for c in corners))
    l2 = ParallelLayer(tuple(cube(c, 1) for c in corners))
    return ArchitectureSpec(side**D, q, (l1, l2), cluster_bound=2**D, family="lattice",
                            params={"D": D, "side": side})


def unstructured_layer(edges: Sequence[tuple[int, int, float]], n: int, q: int = 2,
                       measure: str = "haar") -> tuple[ArchitectureSpec, bool]:
    """Normalise edge weights to probabilities over unordered pairs.

    Zero-weight edges are dropped.  Returns the spec and whether the graph on
    the remaining edges is connected and spans all ``n`` sites.
    """
    merged: dict[tuple[int, int], float] = {}
    for i, j, w in edges:
        if w < 0:
            raise ValueError(f"negative weight on edge ({i}, {j})")
        if i == j:
            raise ValueError(f"self-loop at {i}")
        key = (min(i, j), max(i, j))
        merged[key] = merged.get(key, 0.0) + float(w)
    total = sum(merged.values())
    if total <= 0:
        raise ValueError("all edge weights are zero")
    kept = tuple((i, j, w / total) for (i, j), w in sorted(merged.items()) if w > 0)
    layer = UnstructuredLayer(kept, measure)
    g = layer.graph
    g.add_nodes_from(range(n))
    spec = ArchitectureSpec(n, q, (layer,), family="unstructured")
    return spec, nx.is_connected(g)


def complete_graph_layer(n: int, q: int = 2) -> ArchitectureSpec:
    spec, _ = unstructured_layer([(i, j, 1.0) for i in range(n) for j in range(i + 1, n)], n, q)
    return spec


def max_degree(layer: UnstructuredLayer) -> int:
    return max(d for _, d in layer.graph.degree)


def spurious_circuit(n: int, m_layers: int, alpha: float, seed=None) -> list[UnstructuredLayer]:
    """Mostly deterministic 1-D circuit: each neighbouring pair of each layer
    independently gets a random gate with probability ``alpha``.

    Each realisation lists only the random gates (deterministic gates are
    identity placeholders); its edge weights are 1 and mean "apply this gate".
    """
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    marks = rng.random((m_layers, n - 1)) < alpha
    return [UnstructuredLayer(tuple((int(i), int(i) + 1, 1.0) for i in np.flatnonzero(row)), "spurious")
            for row in marks]


# ----------------------------------------------------------------------------
# cluster graphs and Hamiltonian paths
# ----------------------------------------------------------------------------

@dataclass
class ClusterGraph:
    """Overlap graph of the clusters of a parallel architecture.

    Nodes are ``(layer_index, cluster_index)``; ``site_map`` gives each node's sites.
    """

    graph: nx.Graph
    site_map: dict
    spec: ArchitectureSpec | None = None

    @property
    def connected(self) -> bool:
        return self.graph.number_of_nodes() > 0 and nx.is_connected(self.graph)

    @property
    def bipartite_by_layer(self) -> bool:
        return all(u[0] != v[0] for u, v in self.graph.edges)


def cluster_graph(spec: ArchitectureSpec) -> ClusterGraph:
    g = nx.Graph()
    site_map = {}
    for li, layer in enumerate(spec.layers):
        if not isinstance(layer, ParallelLayer):
            raise ValueError("cluster_graph needs parallel layers only")
        for ci, c in enumerate(layer.clusters):
            site_map[(li, ci)] = frozenset(c)
            g.add_node((li, ci))
    nodes = list(site_map)
    for a, b in itertools.combinations(nodes, 2):
        if site_map[a] & site_map[b]:
            g.add_edge(a, b)
    return ClusterGraph(g, site_map, spec)


def is_hamiltonian_path(g: nx.Graph, path: Sequence) -> bool:
    """Independent validator: every node exactly once, consecutive nodes adjacent."""
    if len(path) != g.number_of_nodes() or set(path) != set(g.nodes) or len(set(path)) != len(path):
        return False
    return all(g.has_edge(a, b) for a, b in zip(path, path[1:]))


@dataclass
class PathSearch:
    path: list | None
    reason: str


def _constructive_path(cg: ClusterGraph):
    spec = cg.spec
    if spec is None or spec.family not in ("brickwork", "lattice"):
        return None
    l1, l2 = spec.layers
    if spec.family == "brickwork":
        path = []
        for i in range(len(l1.clusters)):
            path.append((0, i))
            if i < len(l2.clusters):
                path.append((1, i))
        return path
    # both layers list clusters in the same lexicographic corner order, so the
    # nested loop over corners alternates L1(c), L2(c)
    return [node for i in range(len(l1.clusters)) for node in ((0, i), (1, i))]


def hamiltonian_path(cg: ClusterGraph, budget: int = 10_000_000) -> PathSearch:
    """Hamiltonian path of the cluster graph.

    Recognised generator families use a constructive path; anything else goes
    through depth-first backtracking limited to ``budget`` node expansions.
    ``reason`` distinguishes "none exists" from "budget exhausted".
    """
    g = cg.graph
    path = _constructive_path(cg)
    if path is not None and is_hamiltonian_path(g, path):
        return PathSearch(path, "constructive")
    n = g.number_of_nodes()
    if n == 0:
        return PathSearch(None, "empty graph")
    if not nx.is_connected(g):
        return PathSearch(None, "no path exists: graph is disconnected")
    adj = {v: sorted(g.neighbors(v), key=lambda u: g.degree[u]) for v in g.nodes}
    expansions = 0
    exhausted = False

    def extend(path, visited):
        nonlocal expansions, exhausted
        if len(path) == n:
            return True
        for u in adj[path[-1]]:
            if u in visited:
                continue
            expansions += 1
            if expansions > budget:
                exhausted = True
                return False
            path.append(u)
            visited.add(u)
            if extend(path, visited):
                return True
            path.pop()
            visited.discard(u)
            if exhausted:
                return False
        return False

    # low-degree vertices first: Hamiltonian paths must end at degree-1 nodes
    for start in sorted(g.nodes, key=lambda v: g.degree[v]):
        path = [start]
        if extend(path, {start}):
            return PathSearch(path, "search")
        if exhausted:
            return PathSearch(None, f"search budget of {budget} expansions exhausted")
    return PathSearch(None, "no path exists: exhaustive search failed")


# ----------------------------------------------------------------------------
# chunk partitions
# ----------------------------------------------------------------------------

@dataclass
class PathPlan:
    """Two overlapping near-partitions of an alternating cluster path.

    Chunks are lists of path positions.  ``P1`` chunks hold ``r`` nodes of the
    path's first layer (with the interleaved second-layer nodes) and skip the
    second-layer node after each chunk; ``P2`` starts with ``3r/2`` and then
    holds ``r`` second-layer nodes per chunk, skipping first-layer nodes.
    """

    path: list
    r: int
    P1: list[list[int]]
    P2: list[list[int]]
    skipped1: list[int]
    skipped2: list[int]
    merged_tail: tuple[bool, bool]
    valid_r: bool
    observations: dict = field(default_factory=dict)

    def nodes(self, chunk: Sequence[int]) -> list:
        return [self.path[i] for i in chunk]


def _chunk(length: int, start: int, first: int, step: int, half: int) -> tuple[list, list, bool]:
    """Cut positions ``[0, length)`` into chunks separated by single gaps.

    The first chunk is ``[0, first)``; later chunks span ``step`` positions
    after each gap.
    ``half`` is the element count below which the tail merges back.
    """
    chunks, gaps = [], []
    end = min(first, length)
    chunks.append(list(range(0, end)))
    pos = end
    while pos < length:
        gaps.append(pos)
        lo = pos + 1
        hi = min(lo + step, length)
        if lo >= length:
            break
        chunks.append(list(range(lo, hi)))
        pos = hi
    merged = False
    if len(chunks) > 1:
        tail = chunks[-1]
        # elements of the tail in the chunk's own layer (positions of start parity)
        elems = sum(1 for p in tail if p % 2 == start)
        if elems < half:
            gap = gaps.index(tail[0] - 1)
            chunks[-2] = chunks[-2] + [gaps.pop(gap)] + tail
            chunks.pop()
            merged = True
    return chunks, gaps, merged


def chunk_partitions(path: Sequence, r: int, n_sites: int | None = None,
                     site_map: dict | None = None) -> PathPlan:
    """Build the ``P1``/``P2`` chunkings of an alternating path for even ``r``.

    Path positions ``2i`` hold first-layer nodes ``x1_{i+1}`` and ``2i+1`` hold
    second-layer nodes ``x2_{i+1}``.  ``P1`` skips ``x2_r, x2_2r, ...`` and
    ``P2`` skips ``x1_{3r/2+1}, x1_{5r/2+1}, ...``; a final chunk with fewer than
    ``r/2`` elements is merged (with its gap node) into the previous one.
    """
    if r < 2 or r % 2:
        raise ValueError("r must be an even integer >= 2")
    path = list(path)
    if len(path) == 0:
        raise ValueError("empty path")
    if any(isinstance(v, tuple) and len(v) == 2 for v in path):
        layers = [v[0] for v in path]
        if any(layers[i] == layers[i + 1] for i in range(len(layers) - 1)):
            raise ValueError("path does not alternate between layers")
    length = len(path)
    p1, s1, m1 = _chunk(length, 0, 2 * r - 1, 2 * r - 1, r // 2)
    p2, s2, m2 = _chunk(length, 1, 3 * r, 2 * r - 1, r // 2)
    if n_sites is None and site_map is not None:
        n_sites = len(set().union(*site_map.values()))
    valid_r = n_sites is None or r < n_sites / 4
    plan = PathPlan(path, r, p1, p2, s1, s2, (m1, m2), valid_r)
    plan.observations = check_observations(plan, site_map)
    return plan


def _chunk_sites(plan: PathPlan, chunk, site_map) -> set:
    return set().union(*(site_map[plan.path[i]] for i in chunk))


def check_observations(plan: PathPlan, site_map: dict | None = None) -> dict:
    """Audit the three structural properties the gluing argument relies on.

    1. consecutive chunks in the glue order ``P1[0], P2[0], P1[1], ...`` share
       at least ``r - 1`` sites (needs ``site_map``);
    2. no chunk holds more than ``3r/2`` elements of its own layer;
    3. the skipped positions are exactly the gap positions of the closed form.
    """
    r, length = plan.r, len(plan.path)
    obs = {}
    if site_map is not None:
        order = []
        for a, b in itertools.zip_longest(plan.P1, plan.P2):
            order.extend(c for c in (a, b) if c is not None)
        overlaps = [len(_chunk_sites(plan, a, site_map) & _chunk_sites(plan, b, site_map))
                    for a, b in zip(order, order[1:])]
        obs["overlaps"] = overlaps
        obs["obs1"] = all(o >= r - 1 for o in overlaps)
    counts1 = [sum(1 for p in c if p % 2 == 0) for c in plan.P1]
    counts2 = [sum(1 for p in c if p % 2 == 1) for c in plan.P2]
    obs["obs2"] = max(counts1 + counts2) <= 3 * r // 2
    gaps1 = [p for p in range(2 * r - 1, length, 2 * r)]
    gaps2 = [p for p in range(3 * r, length, 2 * r)]
    if plan.merged_tail[0]:
        gaps1 = gaps1[:-1]
    if plan.merged_tail[1]:
        gaps2 = gaps2[:-1]
    obs["obs3"] = plan.skipped1 == gaps1 and plan.skipped2 == gaps2
    for name, chunks, skipped in (("cover1", plan.P1, plan.skipped1), ("cover2", plan.P2, plan.skipped2)):
        flat = sorted(p for c in chunks for p in c) + list(skipped)
        obs[name] = sorted(flat) == list(range(length))
    return obs


# ----------------------------------------------------------------------------
# JSON file format
# ----------------------------------------------------------------------------

def to_dict(spec: ArchitectureSpec) -> dict:
    layers = []
    for layer in spec.layers:
        if isinstance(layer, ParallelLayer):
            layers.append({"type": "parallel", "clusters": [list(c) for c in layer.clusters]})
        else:
            layers.append({"type": "unstructured", "edges": [[i, j, p] for i, j, p in layer.edges]})
    return {"n": spec.n, "q": spec.q, "layers": layers}


def dumps(spec: ArchitectureSpec) -> str:
    return json.dumps(to_dict(spec), indent=2)


def from_dict(doc: dict) -> ArchitectureSpec:
    """Parse and validate an architecture document.

    Raises :class:`ArchitectureError` listing every violation with a JSON path.
    Unstructured edge weights are normalised to probabilities.
    """
    problems = []
    if not isinstance(doc, dict):
        raise ArchitectureError([("$", "document must be an object")])
    for key in ("n", "q", "layers"):
        if key not in doc:
            problems.append((f"$.{key}", "missing"))
    if problems:
        raise ArchitectureError(problems)
    n, q = doc["n"], doc["q"]
    if not isinstance(n, int) or not isinstance(q, int):
        raise ArchitectureError([("$.n", "n and q must be integers")])
    if not isinstance(doc["layers"], list) or not doc["layers"]:
        raise ArchitectureError([("$.layers", "must be a non-empty list")])
    layers = []
    for li, ld in enumerate(doc["layers"]):
        path = f"$.layers[{li}]"
        kind = ld.get("type") if isinstance(ld, dict) else None
        if kind == "parallel":
            cl = ld.get("clusters")
            if not isinstance(cl, list) or not all(isinstance(c, list) and all(isinstance(s, int) for s in c) for c in cl):
                problems.append((f"{path}.clusters", "must be a list of integer lists"))
                continue
            layers.append(ParallelLayer(tuple(tuple(c) for c in cl)))
        elif kind == "unstructured":
            ed = ld.get("edges")
            if not isinstance(ed, list) or not all(isinstance(e, list) and len(e) == 3 for e in ed):
                problems.append((f"{path}.edges", "must be a list of [i, j, weight] triples"))
                continue
            total = sum(float(e[2]) for e in ed)
            if total <= 0 or any(float(e[2]) < 0 for e in ed):
                problems.append((f"{path}.edges", "weights must be non-negative and not all zero"))
                continue
            # already-normalised files load unchanged so that round trips are exact
            scale = 1.0 if abs(total - 1) <= 1e-12 else total
            layers.append(UnstructuredLayer(tuple((int(i), int(j), float(w) / scale) for i, j, w in ed if w > 0)))
        else:
            problems.append((f"{path}.type", f"unknown layer type {kind!r}"))
    if problems:
        raise ArchitectureError(problems)
    spec = ArchitectureSpec(n, q, tuple(layers), family="file")
    problems = validate(spec)
    if problems:
        raise ArchitectureError(problems)
    return spec


def loads(text: str) -> ArchitectureSpec:
    return from_dict(json.loads(text))
