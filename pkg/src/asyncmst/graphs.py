"""Weighted graph model, random generators, and the unique-weight transform.

Graphs are immutable after construction and safe to share across trials.
Node IDs are unique integers drawn from [1, n^3]; edge weights become
pairwise distinct through the endpoint-mixing transform below, which
preserves the relative order of originally distinct weights.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Edge:
    hi: int       # larger endpoint id
    lo: int       # smaller endpoint id
    w: int        # raw weight (possibly duplicated across edges)
    wu: int       # unique weight after the transform (0 before transform)

    @property
    def key(self) -> tuple[int, int, int]:
        """Sort key equivalent to comparing unique weights."""
        return (self.w, self.hi, self.lo)

    @property
    def pair(self) -> tuple[int, int]:
        return (self.hi, self.lo)


class WeightedGraph:
    """Undirected graph with unique node ids and (after transform) unique weights."""

    def __init__(self, ids: list[int], edges: list[Edge], meta: dict | None = None):
        if len(set(ids)) != len(ids):
            raise ValueError("node ids must be distinct")
        self.ids: tuple[int, ...] = tuple(sorted(ids))
        idset = set(self.ids)
        seen: set[tuple[int, int]] = set()
        for e in edges:
            if e.hi <= e.lo:
                raise ValueError(f"edge endpoints must satisfy hi > lo: {e}")
            if e.hi not in idset or e.lo not in idset:
                raise ValueError(f"edge endpoint outside node set: {e}")
            if e.pair in seen:
                raise ValueError(f"parallel edge: {e.pair}")
            if e.w <= 0:
                raise ValueError("weights must be strictly positive")
            seen.add(e.pair)
        self.edges: tuple[Edge, ...] = tuple(edges)
        self.meta: dict = dict(meta or {})
        adj: dict[int, dict[int, Edge]] = {i: {} for i in self.ids}
        for e in self.edges:
            adj[e.hi][e.lo] = e
            adj[e.lo][e.hi] = e
        self.adj: dict[int, dict[int, Edge]] = adj

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, u: int) -> int:
        return len(self.adj[u])

    def neighbors(self, u: int) -> list[int]:
        return sorted(self.adj[u])

    def id_bits(self) -> int:
        return max(self.ids).bit_length()

    def is_connected(self) -> bool:
        return len(components(self, self.ids)) <= 1


def components(graph: WeightedGraph, ids) -> list[set[int]]:
    """Connected components of the subgraph induced by ``ids``."""
    idset = set(ids)
    seen: set[int] = set()
    out: list[set[int]] = []
    for s in sorted(idset):
        if s in seen:
            continue
        comp = {s}
        stack = [s]
        while stack:
            u = stack.pop()
            for v in graph.adj[u]:
                if v in idset and v not in comp:
                    comp.add(v)
                    stack.append(v)
        seen |= comp
        out.append(comp)
    return out


# ---------------------------------------------------------------------------
# unique-weight transform

def make_weights_unique(graph: WeightedGraph) -> WeightedGraph:
    """Return the same graph with pairwise-distinct weights.

    w'(x, y) = w * 2^(2B) + x * 2^B + y   with x > y and B the bit-length of
    the largest node id. Injective in (w, x, y) and order-preserving on
    originally distinct weights.
    """
    b = graph.id_bits()
    edges = [
        Edge(e.hi, e.lo, e.w, (e.w << (2 * b)) | (e.hi << b) | e.lo)
        for e in graph.edges
    ]
    wus = [e.wu for e in edges]
    assert len(set(wus)) == len(wus)
    return WeightedGraph(list(graph.ids), edges, meta=dict(graph.meta))


# ---------------------------------------------------------------------------
# generators

def _draw_ids(n: int, rng: random.Random) -> list[int]:
    return rng.sample(range(1, n ** 3 + 1), n) if n > 1 else [1]

def _edge(u: int, v: int, w: int) -> Edge:
    return Edge(max(u, v), min(u, v), w, 0)


def _random_tree_edges(ids: list[int], rng: random.Random,
                       present: set[tuple[int, int]]) -> list[tuple[int, int]]:
    """Uniform random labelled tree (Pruefer decode), minus edges already present."""
    n = len(ids)
    if n < 2:
        return []
    if n == 2:
        pairs = [(max(ids), min(ids))]
    else:
        seq = [rng.randrange(n) for _ in range(n - 2)]
        degree = [1] * n
        for x in seq:
            degree[x] += 1
        pairs = []
        import heapq
        leaves = [i for i in range(n) if degree[i] == 1]
        heapq.heapify(leaves)
        for x in seq:
            leaf = heapq.heappop(leaves)
            pairs.append((ids[leaf], ids[x]))
            degree[x] -= 1
            if degree[x] == 1:
                heapq.heappush(leaves, x)
        u, v = heapq.heappop(leaves), heapq.heappop(leaves)
        pairs.append((ids[u], ids[v]))
        pairs = [(max(a, b), min(a, b)) for a, b in pairs]
    return [p for p in pairs if p not in present]


def generate_graph(family: str, n: int, seed: int, p: float = 0.3) -> WeightedGraph:
    """Deterministic seeded generator; output is connected and uniquely weighted.

    Families: gnp (repaired to connected with a random spanning tree),
    complete, path, grid (near-square), barbell (two cliques + bridge path).
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = random.Random(("graph", family, n, seed).__repr__())
    ids = _draw_ids(n, rng)
    meta = {"family": family, "n": n, "seed": seed, "repaired": False}
    pairs: list[tuple[int, int]] = []

    if family == "gnp":
        if not (0.0 < p <= 1.0):
            raise ValueError(f"gnp edge probability must be in (0, 1], got {p}")
        meta["p"] = p
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < p:
                    pairs.append((max(ids[i], ids[j]), min(ids[i], ids[j])))
    elif family == "complete":
        for i in range(n):
            for j in range(i + 1, n):
                pairs.append((max(ids[i], ids[j]), min(ids[i], ids[j])))
    elif family == "path":
        order = list(ids)
        rng.shuffle(order)
        meta["path_order"] = order
        for a, b in zip(order, order[1:]):
            pairs.append((max(a, b), min(a, b)))
    elif family == "grid":
        rows = max(1, int(n ** 0.5))
        cols = -(-n // rows)
        meta["shape"] = (rows, cols)
        at = lambda r, c: ids[r * cols + c]
        for r in range(rows):
            for c in range(cols):
                k = r * cols + c
                if k >= n:
                    break
                if c + 1 < cols and k + 1 < n:
                    pairs.append((max(at(r, c), at(r, c + 1)), min(at(r, c), at(r, c + 1))))
                if r + 1 < rows and k + cols < n:
                    pairs.append((max(at(r, c), at(r + 1, c)), min(at(r, c), at(r + 1, c))))
    elif family == "barbell":
        if n < 4:
            raise ValueError("barbell needs n >= 4")
        bridge = max(0, min(n - 4, n // 8))
        k = (n - bridge) // 2
        left, right = ids[:k], ids[k:2 * k]
        path = ids[2 * k:]
        meta["clique_size"] = k
        meta["bridge_len"] = len(path)
        for side in (left, right):
            for i in range(len(side)):
                for j in range(i + 1, len(side)):
                    pairs.append((max(side[i], side[j]), min(side[i], side[j])))
        chain = [left[0], *path, right[0]]
        for a, b in zip(chain, chain[1:]):
            pairs.append((max(a, b), min(a, b)))
    else:
        raise ValueError(f"unknown family {family!r}")

    present = set(pairs)
    probe = WeightedGraph(ids, [Edge(a, b, 1, 0) for a, b in pairs])
    if not probe.is_connected():
        extra = _random_tree_edges(ids, rng, present)
        # adding a spanning tree makes any vertex set connected
        pairs.extend(e for e in extra)
        meta["repaired"] = True

    wmax = max(1, n * n)
    edges = [_edge(a, b, rng.randint(1, wmax)) for a, b in pairs]
    return make_weights_unique(WeightedGraph(ids, edges, meta=meta))


# ---------------------------------------------------------------------------
# plain-text graph files: line 1 "n m", then "u v w" per edge

def save_graph(graph: WeightedGraph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{graph.n} {graph.m}\n")
        for e in graph.edges:
            fh.write(f"{e.hi} {e.lo} {e.w}\n")


def load_graph(path: str) -> WeightedGraph:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError("first line must be 'n m'")
        n, m = int(header[0]), int(header[1])
        ids: set[int] = set()
        edges: list[Edge] = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            u, v, w = (int(t) for t in line.split())
            if u == v:
                raise ValueError(f"self-loop on {u}")
            ids.add(u)
            ids.add(v)
            edges.append(_edge(u, v, w))
        if len(edges) != m:
            raise ValueError(f"expected {m} edges, found {len(edges)}")
        if len(ids) > n:
            raise ValueError(f"more endpoints than declared nodes ({len(ids)} > {n})")
    g = WeightedGraph(sorted(ids), edges, meta={"family": "file", "path": path})
    return make_weights_unique(g)
