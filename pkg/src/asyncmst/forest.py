"""Spanning forest of the dense core: initialization and the maximal-tree loop.

Stage one of the pipeline. Stars seed height-one fragments among their
high-degree neighbors; low-degree non-stars flood their status once; each
fragment leader then repeatedly samples outgoing edges, merging toward
higher fragment ids until nothing but low-degree territory surrounds the
tree. A fragment with a pending request toward a smaller id holds the reply
until its own id catches up, so the smallest fragment always makes progress
and same-tree requests always die on the id-equality rejection.

Wire tags (``mt.`` prefix): star, child, nchild, snode, lowdeg, sreq, srep,
vfind, vrep, dq, dr, tstart, cc, domerge, merge, accept, reject, mres,
adopt, done.
"""

from __future__ import annotations

import numpy as np

from asyncmst.fragments import FragmentOps
from asyncmst.sketch import EdgeTable, prf

_IDLE, _SAMPLING, _AWAIT_MERGE, _WAITING, _TERMINATED, _ABSORBED = range(6)


class ForestRole:
    def __init__(self, node, is_star: bool):
        self.node = node                      # pipeline node (send/know/cfg)
        cfg = node.cfg
        self.cfg = cfg
        self.know = node.know
        self.node_id = node.know.own
        self.us_seed = cfg.protocol_seed
        self.is_star = is_star
        self.is_high = self.know.degree >= cfg.degree_threshold
        self.in_gprime = self.is_star or self.is_high

        self.table = EdgeTable(self.know)
        self.low_mask = np.zeros(self.table.size, dtype=bool)
        self.sampled_mask = np.zeros(self.table.size, dtype=bool)
        self._mask_phase = -1

        self.frag: int | None = self.node_id if self.is_star else None
        self.parent: int | None = None
        self.tree_nbrs: set[int] = set()
        self.low_heard: set[int] = set()
        self.star_nbrs: set[int] = set()

        self.init_done = False
        self._replies = 0
        self.forest_done = False

        self.state = _IDLE
        self.phase = 0
        self.counter = 0
        self.sample: list = []            # (wkey, insider, outsider, valid)
        self.empty_streak = 0
        self.level = 4
        self.deferred: dict[int, int] = {}    # src -> held merge id
        self.held: list = []                  # messages gated on init
        self.ops = FragmentOps(self, "mt.", cfg)

    # ------------------------------------------------------------------
    # host API for FragmentOps

    def send(self, dst, tag, payload, bits):
        self.node.send(dst, tag, payload, bits=bits, stage="forest")

    def filter_mask(self, spec):
        phase = spec[1]
        if phase != self._mask_phase:
            self.sampled_mask[:] = False
            self._mask_phase = phase
        return ~self.low_mask & ~self.sampled_mask

    def tree_neighbors(self):
        return sorted(self.tree_nbrs)

    def tree_parent(self):
        return self.parent

    def frag_id(self):
        return self.frag

    def probe_reply(self, src):
        return (self.is_high, self.is_star, self.frag, None,
                self.know.wt[src])

    def on_probe_reply(self, nbr, reply):
        self.sampled_mask[self.table.index_of(nbr)] = True

    # ------------------------------------------------------------------
    # wake-up (Initialization)

    def on_wake(self):
        if self.is_star:
            for v in self.know.nbrs:
                self.send(v, "mt.star", (), bits=1)
            if self.know.degree == 0:
                self._init_complete()
        elif not self.is_high:
            for v in self.know.nbrs:
                self.send(v, "mt.lowdeg", (), bits=1)
            self.node.on_forest_quiescent()
        # high-degree non-stars act on receipt only

    def _init_complete(self):
        self.init_done = True
        held, self.held = self.held, []
        for src, tag, payload in held:
            self.on_message(src, tag, payload)
        if self.is_star and self.state == _IDLE and self.frag == self.node_id:
            self._start_phase()

    # ------------------------------------------------------------------
    # message dispatch

    def on_message(self, src, tag, payload):
        if self.ops.handles(tag):
            self.ops.handle(src, tag, payload)
            return
        kind = tag[3:]
        if kind == "star":
            self._on_star(src)
        elif kind in ("child", "nchild", "snode"):
            self._on_star_reply(src, kind)
        elif kind == "lowdeg":
            self._on_lowdeg(src)
        elif kind == "domerge":
            self._on_domerge(src, *payload)
        elif kind == "merge":
            self._on_merge(src, payload[0])
        elif kind == "accept":
            self._on_accept(src, payload[0])
        elif kind == "reject":
            self._on_reject(src)
        elif kind == "mres":
            self._on_merge_result(src, payload[0])
        elif kind == "adopt":
            self._on_adopt(src, payload[0])
        elif kind == "done":
            self._on_done(src, payload[0])
        else:
            raise ValueError(f"forest: unroutable {tag}")

    # -- initialization exchanges ------------------------------------------

    def _on_star(self, src):
        self.star_nbrs.add(src)
        if self.is_star:
            self.send(src, "mt.snode", (), bits=1)
        elif self.is_high and self.frag is None:
            self.frag = src
            self.parent = src
            self.tree_nbrs.add(src)
            self.send(src, "mt.child", (), bits=1)
            self._init_complete()
        else:
            self.send(src, "mt.nchild", (), bits=1)

    def _on_star_reply(self, src, kind):
        if kind == "child":
            self.tree_nbrs.add(src)
        elif kind == "snode":
            self.star_nbrs.add(src)
        self._replies += 1
        if self.is_star and not self.init_done and self._replies == self.know.degree:
            self._init_complete()

    def _on_lowdeg(self, src):
        if src not in self.low_heard:
            self.low_heard.add(src)
            self.low_mask[self.table.index_of(src)] = True
            self.ops.note_event()

    # -- the maximal-tree phase loop (leader only) ---------------------------

    def _start_phase(self):
        self.phase += 1
        self.counter = 0
        self.sample = []
        self.empty_streak = 0
        self.state = _SAMPLING
        self._next_call()

    def _next_call(self):
        if self.state != _SAMPLING:
            return
        if self.counter >= self.cfg.sample_budget:
            self._wait_branch()
            return
        self.counter += 1
        self.ops.find_any(("mt", self.phase), self.level, self._sample_done)

    def _sample_done(self, res):
        if self.state != _SAMPLING:
            return
        kind = res[0]
        if kind == "empty":
            self.empty_streak += 1
            if self.empty_streak >= 2:
                self._terminate()
            else:
                self._next_call()
            return
        self.empty_streak = 0
        if kind == "fail":
            L = self.cfg.sketch_levels
            if res[1] == "bare":
                self.level = max(0, self.level - 2)
            elif res[1] == "crowd":
                self.level = min(L - 1, self.level + 2)
            else:
                self.level = prf(self.us_seed, self.phase, self.counter) % L
            self._next_call()
            return
        _, hi, lo, insider, reply = res
        is_high, is_star, _, _, wkey = reply
        outsider = lo if insider == hi else hi
        valid = is_high or is_star
        self.sample.append((wkey, insider, outsider, valid))
        if valid:
            self._merge_attempt(min(e for e in self.sample if e[3]))
        else:
            self._next_call()

    def _wait_branch(self):
        self.state = _WAITING

        def got_estimate(est):
            quota = max(1, (est // 2 + 3) // 4)
            self.ops.threshold(quota, self._triggered)

        self.ops.approx_cut(("mt", self.phase), got_estimate)

    def _triggered(self, _total):
        if self.state == _WAITING:
            self._start_phase()

    def _merge_attempt(self, entry):
        self.state = _AWAIT_MERGE
        _, insider, outsider, _ = entry
        self._flood("mt.domerge", (insider, outsider), bits=76, exclude=None)
        if insider == self.node_id:
            self.send(outsider, "mt.merge", (self.frag,), bits=31)

    def _terminate(self):
        self.state = _TERMINATED
        self.forest_done = True
        self._flood("mt.done", (self.frag,), bits=31, exclude=None)
        self.node.on_forest_quiescent()
        self.node.on_component_rooted()

    def _flood(self, tag, payload, bits, exclude):
        for v in sorted(self.tree_nbrs):
            if v != exclude:
                self.send(v, tag, payload, bits=bits)

    # -- merge handshake ------------------------------------------------------

    def _on_domerge(self, src, insider, outsider):
        for v in sorted(self.tree_nbrs):
            if v != src:
                self.send(v, "mt.domerge", (insider, outsider), bits=76)
        if insider == self.node_id:
            self.send(outsider, "mt.merge", (self.frag,), bits=31)

    def _on_merge(self, src, tid):
        gated = (self.is_high and not self.is_star and self.frag is None) or \
                (self.is_star and not self.init_done)
        if gated:
            self.held.append((src, "mt.merge", (tid,)))
            return
        assert self.in_gprime, "merge request reached a low-degree non-star"
        if tid < self.frag:
            self.tree_nbrs.add(src)
            self.send(src, "mt.accept", (self.frag,), bits=31)
        elif tid > self.frag:
            self.deferred[src] = tid
        else:
            self.send(src, "mt.reject", (), bits=1)

    def _re_evaluate_deferred(self):
        for src in sorted(self.deferred):
            tid = self.deferred[src]
            if self.frag >= tid:
                del self.deferred[src]
                if tid < self.frag:
                    self.tree_nbrs.add(src)
                    self.send(src, "mt.accept", (self.frag,), bits=31)
                else:
                    self.send(src, "mt.reject", (), bits=1)

    def _on_accept(self, src, new_id):
        # we are the insider of the requesting fragment
        self.tree_nbrs.add(src)
        old_nbrs = self.tree_nbrs - {src}
        self.parent = src
        if self.state in (_SAMPLING, _AWAIT_MERGE, _WAITING):
            self.state = _ABSORBED
        self._adopt_id(new_id)
        for v in sorted(old_nbrs):
            self.send(v, "mt.adopt", (new_id,), bits=31)

    def _on_reject(self, src):
        self._relay_merge_result("reject")

    def _on_merge_result(self, src, verdict):
        self._relay_merge_result(verdict)

    def _relay_merge_result(self, verdict):
        if self.state == _AWAIT_MERGE and self.parent is None:
            # leader: a rejected merge opens a new phase
            self._start_phase()
        elif self.parent is not None:
            self.send(self.parent, "mt.mres", (verdict,), bits=2)

    def _on_adopt(self, src, new_id):
        self.parent = src
        if self.state in (_SAMPLING, _AWAIT_MERGE, _WAITING):
            self.state = _ABSORBED   # no longer a leader
        self._adopt_id(new_id)
        for v in sorted(self.tree_nbrs):
            if v != src:
                self.send(v, "mt.adopt", (new_id,), bits=31)

    def _adopt_id(self, new_id):
        assert self.frag is None or new_id >= self.frag
        self.frag = new_id
        self._re_evaluate_deferred()

    # -- terminal flood -------------------------------------------------------

    def _on_done(self, src, root_id):
        if self.forest_done:
            return
        self.forest_done = True
        self.frag = root_id
        for v in sorted(self.tree_nbrs):
            if v != src:
                self.send(v, "mt.done", (root_id,), bits=31)
        self.node.on_forest_tree_settled(src)
        self.node.on_forest_quiescent()
