"""Gated layered BFS over the sparse spanner.

The spanner consists of the forest-tree edges plus every edge with at least
one low-degree endpoint; each endpoint derives its side locally (low nodes
take all incident edges; others take their tree links plus the edges they
heard a low-degree flood over), so no extra membership messages are needed.

A designated initiator grows the tree one layer per round: extend rides
down the tree, frontier nodes probe their unresolved spanner neighbors,
join/nojoin answers resolve each edge at most once per direction, and
layer-done counts convergecast back. Nodes answer probes only once their
own forest role has settled; early probes wait in a hold queue.
"""

from __future__ import annotations


class BfsRole:
    def __init__(self, node, forest, is_initiator: bool):
        self.node = node
        self.forest = forest
        self.know = node.know
        self.node_id = node.know.own
        self.is_initiator = is_initiator

        self.gate_open = False
        self.held: list = []
        self.sparse: tuple[int, ...] = ()
        self.joined = False
        self.parent: int | None = None
        self.depth: int | None = None
        self.kids: list[int] = []
        self.unresolved: set[int] = set()
        self.probed = False
        self._await_probe = 0
        self._added = 0
        self._await_kids = 0
        self._kid_snapshot: tuple[int, ...] = ()
        self.layer = 0
        self.done = False

    # ------------------------------------------------------------------

    def send(self, dst, tag, payload=(), bits=24):
        self.node.send(dst, tag, payload, bits=bits, stage="bfs")

    def sparse_neighbors(self) -> tuple[int, ...]:
        # membership is by degree class: every edge of a low-degree node is
        # in the spanner, whether or not that node is a star
        if self.forest.is_high:
            keep = set(self.forest.tree_nbrs) | set(self.forest.low_heard)
            return tuple(sorted(keep))
        return self.know.nbrs

    def open_gate(self):
        """Called when this node's forest duties are over."""
        if self.gate_open:
            return
        self.gate_open = True
        self.sparse = self.sparse_neighbors()
        held, self.held = self.held, []
        for src, tag, payload in held:
            self.on_message(src, tag, payload)
        if self.is_initiator and self.node.wants_bfs:
            self.joined = True
            self.depth = 0
            self.unresolved = set(self.sparse)
            self._next_layer()

    # ------------------------------------------------------------------

    def on_message(self, src, tag, payload):
        if not self.gate_open:
            self.held.append((src, tag, payload))
            return
        kind = tag[4:]
        if kind == "extend":
            self._on_extend(src, payload[0])
        elif kind == "probe":
            self._on_probe(src, payload[0])
        elif kind == "join":
            self._on_answer(src, True)
        elif kind == "nojoin":
            self._on_answer(src, False)
        elif kind == "ldone":
            self._on_ldone(src, payload[0])
        else:
            raise ValueError(f"bfs: unroutable {tag}")

    # -- rounds ---------------------------------------------------------

    def _next_layer(self):
        self._on_extend(None, self.layer)

    def _on_extend(self, src, layer):
        self._added = 0
        if self.depth == layer:
            self._probe_round()
            return
        self._kid_snapshot = tuple(self.kids)
        self._await_kids = len(self._kid_snapshot)
        for v in self._kid_snapshot:
            self.send(v, "bfs.extend", (layer,))
        if not self._kid_snapshot:
            self._layer_report()

    def _probe_round(self):
        if self.probed:
            self._layer_report()
            return
        self.probed = True
        targets = sorted(self.unresolved - {self.parent} if self.parent
                         is not None else self.unresolved)
        self._await_probe = len(targets)
        for v in targets:
            self.send(v, "bfs.probe", (self.depth + 1,))
        if not targets:
            self._layer_report()

    def _on_probe(self, src, layer):
        if not self.joined:
            self.joined = True
            self.parent = src
            self.depth = layer
            self.unresolved = set(self.sparse) - {src}
            self.send(src, "bfs.join", ())
        else:
            self.send(src, "bfs.nojoin", ())

    def _on_answer(self, src, joined):
        self.unresolved.discard(src)
        if joined:
            self.kids.append(src)
            self._added += 1
        self._await_probe -= 1
        if self._await_probe == 0:
            self._layer_report()

    def _on_ldone(self, src, added):
        self._added += added
        self._await_kids -= 1
        if self._await_kids == 0:
            self._layer_report()

    def _layer_report(self):
        if self.parent is not None:
            self.send(self.parent, "bfs.ldone", (self._added,))
            return
        # initiator: decide on another round
        if self._added > 0:
            self.layer += 1
            self._next_layer()
        else:
            self.done = True
            self.node.on_bfs_complete()
