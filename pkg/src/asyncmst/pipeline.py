"""Role assignment, stage gating, and end-to-end trial execution.

One actor per node composes the four protocol roles. Gates implement the
staged participation rules: low-degree non-stars enter the final MST stage
right after their wake-up floods; core nodes enter only once their minimum
forest component settles; everyone answers spanner probes only after its
own forest duties are over. Held messages are replayed in arrival order
when a gate opens.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from asyncmst.bfs import BfsRole
from asyncmst.config import RunConfig, parse_family
from asyncmst.fmin import FminRole
from asyncmst.forest import ForestRole
from asyncmst.ghs import GhsRole
from asyncmst.graphs import WeightedGraph, generate_graph
from asyncmst.sim import Metrics, Network, knowledge_init, make_policy
from asyncmst.sketch import prf


class RoleError(RuntimeError):
    pass


def assign_stars(graph: WeightedGraph, cfg: RunConfig) -> set[int]:
    """Seeded self-selection, redrawn until every high-degree non-star node
    has a star neighbor (up to 50 attempts)."""
    d_high = cfg.degree_threshold
    p = cfg.star_probability
    scale = 1 << 53
    cut = int(p * scale)
    high = {u for u in graph.ids if graph.degree(u) >= d_high}
    for attempt in range(50):
        stars = {u for u in graph.ids
                 if prf(cfg.protocol_seed, 0x57A2, attempt, u) % scale < cut}
        ok = all(u in stars or any(v in stars for v in graph.adj[u])
                 for u in high)
        if ok:
            return stars
    raise RoleError(
        f"star selection failed 50 times (n={graph.n}, p={p:.2e}, "
        f"|high|={len(high)}); raise beta or rethink the configuration")


def pick_initiator(graph: WeightedGraph, stars: set[int]) -> int:
    return min(stars) if stars else min(graph.ids)


class PipelineNode:
    def __init__(self, net: Network, know, cfg: RunConfig, is_star: bool,
                 is_initiator: bool, stage: str):
        self.net = net
        self.know = know
        self.cfg = cfg
        self.stage = stage
        self.wants_fmin = stage in ("fmin", "mst", "all")
        self.wants_bfs = stage in ("bfs", "all")
        self.wants_mst = stage in ("mst", "all")

        self.forest = ForestRole(self, is_star)
        self.fmin = FminRole(self, self.forest)
        self.bfs = BfsRole(self, self.forest, is_initiator)
        self.ghs = GhsRole(self)
        self.mst_done = False
        self.fmin_done = False

    # ------------------------------------------------------------------

    def send(self, dst, tag, payload=(), bits=1, stage="misc"):
        self.net.send(self.know.own, dst, tag, payload, bits=bits, stage=stage)

    def on_wake(self):
        self.forest.on_wake()
        g = self.forest
        if not g.in_gprime:
            # low-degree non-star: forest duties end with the wake-up floods
            if self.wants_mst:
                self.ghs.wake(self.know.nbrs)

    def on_message(self, src, tag, payload):
        if tag.startswith("mt."):
            self.forest.on_message(src, tag, payload)
        elif tag.startswith("fm."):
            self.fmin.on_message(src, tag, payload)
        elif tag.startswith("bfs."):
            self.bfs.on_message(src, tag, payload)
        elif tag.startswith("ghs."):
            self.ghs.on_message(src, tag, payload)
        else:
            raise ValueError(f"pipeline: unroutable {tag}")

    # -- gate hooks ------------------------------------------------------

    def on_forest_quiescent(self):
        if self.wants_bfs:
            self.bfs.open_gate()

    def on_forest_tree_settled(self, tparent):
        if self.wants_fmin:
            kids = set(self.forest.tree_nbrs) - {tparent}
            self.fmin.start(tparent, kids)

    def on_component_rooted(self):
        if self.wants_fmin:
            self.fmin.start(None, set(self.forest.tree_nbrs))

    def on_fmin_complete(self):
        self.fmin_done = True
        if self.wants_mst:
            if self.forest.is_high:
                allowed = set(self.fmin.fmin_edges) | set(self.forest.low_heard)
            else:
                allowed = set(self.know.nbrs)   # low-degree star
            self.ghs.wake(sorted(allowed))

    def on_mst_complete(self):
        self.mst_done = True

    def on_bfs_complete(self):
        pass


# ---------------------------------------------------------------------------

@dataclass
class TrialResult:
    cfg: RunConfig
    graph: WeightedGraph
    stars: set[int]
    high: set[int]
    initiator: int
    metrics: Metrics
    forest_edges: set[tuple[int, int]] = field(default_factory=set)
    fmin_edges: set[tuple[int, int]] = field(default_factory=set)
    mst_edges: set[tuple[int, int]] = field(default_factory=set)
    bfs_depth: dict[int, int] = field(default_factory=dict)
    bfs_parent: dict[int, int] = field(default_factory=dict)
    low_heard: dict[int, set[int]] = field(default_factory=dict)
    frag_of: dict[int, int] = field(default_factory=dict)
    trace: list | None = None

    @property
    def gprime_nodes(self) -> set[int]:
        return self.high | self.stars

    def stage_messages(self, *stages) -> int:
        per = self.metrics.per_stage
        return sum(per[s]["congest"] for s in stages if s in per)

    def stage_time(self, *stages) -> float:
        return max((self.metrics.stage_time(s) for s in stages), default=0.0)


def build_graph(cfg: RunConfig) -> WeightedGraph:
    family, params = parse_family(cfg.family)
    return generate_graph(family, cfg.n, seed=cfg.graph_seed, **params)


def run_trial(cfg: RunConfig, graph: WeightedGraph | None = None) -> TrialResult:
    if graph is None:
        graph = build_graph(cfg)
    stars = assign_stars(graph, cfg)
    initiator = pick_initiator(graph, stars)
    know = knowledge_init(graph, cfg.n_est)
    policy = make_policy(cfg.scheduler, cfg.scheduler_seed, graph.ids)
    net = Network(graph.ids, policy, cfg.congest_bits,
                  pipelined_bits=cfg.pipelined_bits,
                  max_events=cfg.max_events, trace=cfg.trace)
    nodes: dict[int, PipelineNode] = {}
    for u in graph.ids:
        node = PipelineNode(net, know[u], cfg, is_star=u in stars,
                            is_initiator=u == initiator, stage=cfg.stage)
        nodes[u] = node
        net.add_actor(u, node)
    net.wake_all()
    metrics = net.run()

    res = TrialResult(
        cfg=cfg, graph=graph, stars=stars,
        high={u for u in graph.ids if nodes[u].forest.is_high},
        initiator=initiator, metrics=metrics,
        trace=net.trace,
    )
    for u, node in sorted(nodes.items()):
        f = node.forest
        for v in f.tree_nbrs:
            res.forest_edges.add((max(u, v), min(u, v)))
        for v in node.fmin.fmin_edges:
            res.fmin_edges.add((max(u, v), min(u, v)))
        res.mst_edges |= node.ghs.branch_edges()
        if node.bfs.joined:
            res.bfs_depth[u] = node.bfs.depth
            if node.bfs.parent is not None:
                res.bfs_parent[u] = node.bfs.parent
        res.low_heard[u] = set(f.low_heard)
        res.frag_of[u] = f.frag if f.frag is not None else u
    # completion flags for the verification layer
    flags = metrics.flags
    flags["forest_done"] = all(nodes[u].forest.forest_done or
                               not nodes[u].forest.in_gprime
                               for u in graph.ids)
    if cfg.stage in ("fmin", "mst", "all"):
        flags["fmin_done"] = all(nodes[u].fmin.done or
                                 not nodes[u].forest.in_gprime
                                 for u in graph.ids)
    if cfg.stage in ("mst", "all"):
        flags["mst_done"] = all(nodes[u].mst_done for u in graph.ids)
    if cfg.stage in ("bfs", "all"):
        flags["bfs_done"] = len(res.bfs_depth) == graph.n
    return res


def derived_sparse_edges(res: TrialResult) -> set[tuple[int, int]]:
    """Ground-truth spanner: forest edges plus every low-degree-incident edge."""
    out = set(res.forest_edges)
    for e in res.graph.edges:
        if e.hi not in res.high or e.lo not in res.high:
            out.add(e.pair)
    return out


def derived_smin_edges(res: TrialResult) -> set[tuple[int, int]]:
    """Final-stage subgraph: minimum forest plus low-degree-incident edges."""
    out = set(res.fmin_edges)
    for e in res.graph.edges:
        if e.hi not in res.high or e.lo not in res.high:
            out.add(e.pair)
    return out
