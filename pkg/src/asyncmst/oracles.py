"""Sequential reference algorithms used to verify the distributed stack.

Everything here sees the whole graph; the protocol code never imports this
module. Comparisons are by unique weight, so answers are unique.
"""

from __future__ import annotations

import random
from collections import deque

from asyncmst.graphs import WeightedGraph, Edge


class UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}
        self.rank = {x: 0 for x in items}

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def minimum_spanning_forest(graph: WeightedGraph,
                            edge_subset=None,
                            node_subset=None) -> tuple[set[tuple[int, int]], dict[int, int]]:
    """Kruskal. Returns (forest edge pairs, component label per node).

    Restricting to a node subset means the induced subgraph; restricting to
    an edge subset means exactly those edges. Disconnected input yields a
    spanning forest plus labels instead of an error.
    """
    nodes = set(node_subset) if node_subset is not None else set(graph.ids)
    if edge_subset is not None:
        pool = [e for e in graph.edges if e.pair in edge_subset]
    else:
        pool = list(graph.edges)
    pool = [e for e in pool if e.hi in nodes and e.lo in nodes]
    uf = UnionFind(nodes)
    forest: set[tuple[int, int]] = set()
    for e in sorted(pool, key=lambda e: e.key):
        if uf.union(e.hi, e.lo):
            forest.add(e.pair)
    labels = {u: uf.find(u) for u in sorted(nodes)}
    return forest, labels


def mst_prim(graph: WeightedGraph) -> set[tuple[int, int]]:
    """Independent second implementation for cross-checking Kruskal."""
    import heapq
    if graph.n == 0:
        return set()
    start = graph.ids[0]
    seen = {start}
    heap = [(e.key, e.pair) for e in graph.adj[start].values()]
    heapq.heapify(heap)
    out: set[tuple[int, int]] = set()
    while heap and len(seen) < graph.n:
        key, (hi, lo) = heapq.heappop(heap)
        new = hi if lo in seen else (lo if hi in seen else None)
        if new is None or new in seen:
            continue
        seen.add(new)
        out.add((hi, lo))
        for e in graph.adj[new].values():
            other = e.hi if e.lo == new else e.lo
            if other not in seen:
                heapq.heappush(heap, (e.key, e.pair))
    return out


def forest_weight(graph: WeightedGraph, pairs) -> int:
    lut = {e.pair: e.wu for e in graph.edges}
    return sum(lut[p] for p in pairs)


def random_spanning_tree(graph: WeightedGraph, rng: random.Random) -> set[tuple[int, int]]:
    """A spanning tree drawn by randomized Kruskal (not uniform; fine for bounds)."""
    pool = list(graph.edges)
    rng.shuffle(pool)
    uf = UnionFind(graph.ids)
    out = set()
    for e in pool:
        if uf.union(e.hi, e.lo):
            out.add(e.pair)
    return out


# ---------------------------------------------------------------------------
# hop distances

def bfs_distances(graph: WeightedGraph, source: int,
                  edge_subset=None) -> dict[int, int]:
    """Exact unweighted hop distances; unreachable nodes are absent."""
    allowed = None if edge_subset is None else set(edge_subset)
    dist = {source: 0}
    q = deque([source])
    while q:
        u = q.popleft()
        for v in sorted(graph.adj[u]):
            if allowed is not None:
                pair = (max(u, v), min(u, v))
                if pair not in allowed:
                    continue
            if v not in dist:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


def eccentricity(graph: WeightedGraph, source: int) -> int:
    d = bfs_distances(graph, source)
    if len(d) != graph.n:
        raise ValueError("graph disconnected")
    return max(d.values())


def diameter(graph: WeightedGraph) -> int:
    """Exact diameter via all-sources sweep (desk scale only).

    Complete graphs short-circuit to 1; anything where the sweep would not
    be exact-and-affordable raises instead of approximating.
    """
    n, m = graph.n, graph.m
    if n <= 1:
        return 0
    if m == n * (n - 1) // 2:
        return 1
    if n * m > 16_000_000:
        raise ValueError(f"diameter sweep too large for n={n}, m={m}")
    return max(eccentricity(graph, u) for u in graph.ids)
