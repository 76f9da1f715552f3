"""Rank-based asynchronous MST over the assembled sparse subgraph.

The classic merge/absorb fragment algorithm: fragments carry a level and a
name (the weight key of their core edge); equal-level fragments joining
over their mutual best edge merge and bump the level, lower-level
fragments are absorbed outright. Replies that would outrun the responder's
state (tests from higher levels, connects over basic edges, reports at the
core) wait in a hold list that is re-scanned after every state change, so
arbitrarily delayed participants are safe - which is what lets low-degree
nodes start immediately while core nodes join only after their minimum
forest settles.

Each node restricts itself to its locally derived edge set; an incoming
message over an unknown edge proves the sender holds it, so the edge is
adopted as basic on first contact (the sender's side always knows
membership: either it is low-degree or the edge is in its minimum forest).
"""

from __future__ import annotations

INF = (1 << 40, 0, 0)

SLEEP, FIND, FOUND = 0, 1, 2
BASIC, BRANCH, REJECTED = 0, 1, 2


class GhsRole:
    def __init__(self, node):
        self.node = node
        self.know = node.know
        self.node_id = node.know.own

        self.awake = False
        self.held: list = []
        self.edges: dict[int, int] = {}      # nbr -> edge state
        self.sn = SLEEP
        self.fn = None
        self.ln = 0
        self.parent: int | None = None
        self.best_edge: int | None = None
        self.best_wt = INF
        self.test_edge: int | None = None
        self.find_count = 0
        self.done = False
        self._halted = False

    # ------------------------------------------------------------------

    def send(self, dst, tag, payload=(), bits=88):
        self.node.send(dst, tag, payload, bits=bits, stage="final")

    def wkey(self, nbr) -> tuple[int, int, int]:
        return self.know.wt[nbr]

    # ------------------------------------------------------------------

    def wake(self, allowed_nbrs) -> None:
        """Join the protocol over the given incident edge set."""
        if self.awake:
            return
        self.awake = True
        for v in allowed_nbrs:
            self.edges.setdefault(v, BASIC)
        if not self.edges:
            self.done = True
            self.node.on_mst_complete()
            return
        m = min(self.edges, key=self.wkey)
        self.edges[m] = BRANCH
        self.sn = FOUND
        self.ln = 0
        self.fn = None
        self.send(m, "ghs.connect", (0,), bits=8)
        self._drain()

    # ------------------------------------------------------------------

    def on_message(self, src, tag, payload):
        if not self.awake:
            self.held.append((src, tag, payload))
            return
        self.edges.setdefault(src, BASIC)  # first contact legitimizes the edge
        if not self._try(src, tag, payload):
            self.held.append((src, tag, payload))
        else:
            self._drain()

    def _drain(self):
        progress = True
        while progress:
            progress = False
            for i, (src, tag, payload) in enumerate(self.held):
                if self._try(src, tag, payload):
                    del self.held[i]
                    progress = True
                    break

    def _try(self, src, tag, payload) -> bool:
        kind = tag[4:]
        if kind == "connect":
            return self._on_connect(src, payload[0])
        if kind == "initiate":
            return self._on_initiate(src, *payload)
        if kind == "test":
            return self._on_test(src, *payload)
        if kind == "accept":
            return self._on_accept(src)
        if kind == "reject":
            return self._on_reject(src)
        if kind == "report":
            return self._on_report(src, payload[0])
        if kind == "changeroot":
            return self._on_changeroot(src)
        if kind == "halt":
            return self._on_halt(src)
        raise ValueError(f"ghs: unroutable {tag}")

    # -- handlers (return False to defer) ----------------------------------

    def _on_connect(self, src, level) -> bool:
        if level < self.ln:
            self.edges[src] = BRANCH
            self.send(src, "ghs.initiate", (self.ln, self.fn, self.sn))
            if self.sn == FIND:
                self.find_count += 1
            return True
        if self.edges[src] == BASIC:
            return False   # wait until our side resolves this edge
        # merge: both chose this edge; its weight names the new fragment
        self.send(src, "ghs.initiate",
                  (self.ln + 1, self.wkey(src), FIND))
        return True

    def _on_initiate(self, src, level, name, state) -> bool:
        self.ln = level
        self.fn = name
        self.sn = state
        self.parent = src
        self.best_edge = None
        self.best_wt = INF
        self.test_edge = None
        for v in sorted(self.edges):
            if v != src and self.edges[v] == BRANCH:
                self.send(v, "ghs.initiate", (level, name, state))
                if state == FIND:
                    self.find_count += 1
        if state == FIND:
            self._test()
        return True

    def _test(self):
        basics = [v for v in self.edges if self.edges[v] == BASIC]
        if basics:
            self.test_edge = min(basics, key=self.wkey)
            self.send(self.test_edge, "ghs.test", (self.ln, self.fn))
        else:
            self.test_edge = None
            self._report()

    def _on_test(self, src, level, name) -> bool:
        if level > self.ln:
            return False
        if name != self.fn:
            self.send(src, "ghs.accept", (), bits=1)
            return True
        if self.edges[src] == BASIC:
            self.edges[src] = REJECTED
        if self.test_edge != src:
            self.send(src, "ghs.reject", (), bits=1)
        else:
            self._test()
        return True

    def _on_accept(self, src) -> bool:
        self.test_edge = None
        if self.wkey(src) < self.best_wt:
            self.best_wt = self.wkey(src)
            self.best_edge = src
        self._report()
        return True

    def _on_reject(self, src) -> bool:
        if self.edges[src] == BASIC:
            self.edges[src] = REJECTED
        self._test()
        return True

    def _report(self):
        if self.find_count == 0 and self.test_edge is None:
            self.sn = FOUND
            self.send(self.parent, "ghs.report", (self.best_wt,))

    def _on_report(self, src, w) -> bool:
        if src != self.parent:
            self.find_count -= 1
            if w < self.best_wt:
                self.best_wt = w
                self.best_edge = src
            self._report()
            return True
        if self.sn == FIND:
            return False
        if w > self.best_wt:
            self._changeroot()
            return True
        if w == INF and self.best_wt == INF:
            self._halt()
        return True

    def _changeroot(self):
        if self.edges[self.best_edge] == BRANCH:
            self.send(self.best_edge, "ghs.changeroot", (), bits=1)
        else:
            self.send(self.best_edge, "ghs.connect", (self.ln,), bits=8)
            self.edges[self.best_edge] = BRANCH

    def _on_changeroot(self, src) -> bool:
        self._changeroot()
        return True

    # -- termination -------------------------------------------------------

    def _halt(self):
        if self._halted:
            return
        self._halted = True
        self.done = True
        for v in sorted(self.edges):
            if self.edges[v] == BRANCH:
                self.send(v, "ghs.halt", (), bits=1)
        self.node.on_mst_complete()

    def _on_halt(self, src) -> bool:
        if not self._halted:
            self._halted = True
            self.done = True
            for v in sorted(self.edges):
                if self.edges[v] == BRANCH and v != src:
                    self.send(v, "ghs.halt", (), bits=1)
            self.node.on_mst_complete()
        return True

    # ------------------------------------------------------------------

    def branch_edges(self) -> set[tuple[int, int]]:
        me = self.node_id
        return {(max(me, v), min(me, v))
                for v, st in self.edges.items() if st == BRANCH}
