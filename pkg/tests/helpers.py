"""Static-fragment micro-harness for exercising fragment primitives.

Builds a Network over a real graph, pins a fragment (tree links fixed), and
lets tests drive find_any / cut_probe / approx_cut / threshold directly.
"""

from __future__ import annotations

import numpy as np

from asyncmst.config import RunConfig
from asyncmst.fragments import FragmentOps
from asyncmst.sim import Network, knowledge_init, make_policy
from asyncmst.sketch import EdgeTable


class StaticHost:
    def __init__(self, net, node_id, know, cfg, frag_of, tree, reply_extra=None):
        self.net = net
        self.node_id = node_id
        self.know = know
        self.cfg = cfg
        self.us_seed = cfg.protocol_seed
        self.table = EdgeTable(know)
        self._frag_of = frag_of
        self._tree = tree
        self._reply_extra = reply_extra or {}
        self.ops = FragmentOps(self, "fx.", cfg)
        self.probed = []

    # -- host API -----------------------------------------------------------
    def send(self, dst, tag, payload, bits):
        self.net.send(self.node_id, dst, tag, payload, bits=bits, stage="fx")

    def filter_mask(self, spec):
        return np.ones(self.table.size, dtype=bool)

    def tree_neighbors(self):
        return self._tree.get(self.node_id, ())

    def tree_parent(self):
        return None

    def frag_id(self):
        return self._frag_of[self.node_id]

    def probe_reply(self, src):
        is_high, is_star = self._reply_extra.get(self.node_id, (True, False))
        return (is_high, is_star, self._frag_of[self.node_id], None,
                self.know.wt[src])

    def on_probe_reply(self, nbr, reply):
        self.probed.append(nbr)

    # -- actor API ----------------------------------------------------------
    def on_wake(self):
        pass

    def on_message(self, src, tag, payload):
        self.ops.handle(src, tag, payload)


def build_fixture(graph, cfg: RunConfig, frag_of, tree):
    """Returns (net, hosts). ``tree`` maps node -> tuple of tree neighbors."""
    policy = make_policy(cfg.scheduler, cfg.scheduler_seed, graph.ids)
    net = Network(graph.ids, policy, cfg.congest_bits,
                  pipelined_bits=cfg.pipelined_bits, max_events=cfg.max_events)
    know = knowledge_init(graph, cfg.n_est)
    hosts = {}
    for u in graph.ids:
        h = StaticHost(net, u, know[u], cfg, frag_of, tree)
        hosts[u] = h
        net.add_actor(u, h)
    net.wake_all()
    net.run()
    return net, hosts


def drive(net, leader_host, start):
    """Run one leader-side op to completion; returns the callback result."""
    out = []
    start(out.append)
    net.run()
    assert out, "operation did not complete"
    return out[-1]
