"""Leader-coordinated fragment primitives over a rooted fragment tree.

One invocation = one broadcast down the tree plus one combining convergecast
back up. The wire carries only a small invocation counter; every member
derives the per-invocation hash seed from the shared PRF key, so sampling
needs no extra coordination messages.

Gather kinds:
  fa    sampled-level XOR sketch plus the signed cut checksum; a decoded
        candidate is then located by a membership flood and confirmed by a
        single query across the edge (no false positives, ever)
  pr    signed cut checksum only: a whp-exact empty-cut probe
  mn    lexicographic minimum of locally unexcluded candidate edges
  occ   multi-hash level-occupancy table for cut-size estimation

plus an event-threshold machine (exact counting; the leader fires once the
aggregate reaches the requested quota).

The host object wires these into a concrete protocol; see ``HOST API``
comments below.
"""

from __future__ import annotations

import numpy as np

from asyncmst.sketch import combine, decode_edge, estimate_from_occupancy, prf

# HOST API (duck-typed):
#   node_id                     int
#   send(dst, tag, payload, bits)
#   table                       EdgeTable
#   filter_mask(spec) -> bool ndarray over table rows
#   tree_neighbors() -> iterable of ids (current fragment tree edges)
#   tree_parent() -> id | None
#   frag_id() -> int
#   probe_reply(src) -> tuple   answer sent across a queried edge; index 2
#                               must be the responder's fragment id
#   on_probe_reply(nbr, reply)  prober-side hook once the answer arrives
#   us_seed                     int (shared PRF key)

_FA, _PR, _MN, _OCC = 0, 1, 2, 3
_KIND_BITS = {_FA: 96, _PR: 32, _MN: 94, _OCC: 32}

OPS_SUFFIXES = ("sreq", "srep", "vfind", "vrep", "dq", "dr", "tstart", "cc")


class FragmentOps:
    def __init__(self, host, prefix: str, cfg):
        self.host = host
        self.p = prefix
        self.cfg = cfg
        self._ctr = 0
        self._gather: dict = {}     # inv -> convergecast state
        self._op = None             # leader-side operation state
        self._events = 0            # lifetime threshold events at this node
        self._tmember: dict = {}    # inv -> reply_to for active threshold
        self._tleader = None        # (inv, quota, total, fired_cb)

    # ------------------------------------------------------------------
    # plumbing

    def _tag(self, suffix: str) -> str:
        return self.p + suffix

    def handles(self, tag: str) -> bool:
        return tag.startswith(self.p) and tag[len(self.p):] in OPS_SUFFIXES

    def _seed(self, inv) -> int:
        return prf(self.host.us_seed, 0xF7A6, inv[0], inv[1])

    def _new_inv(self):
        self._ctr += 1
        return (self.host.node_id, self._ctr)

    # ------------------------------------------------------------------
    # leader-side operations (one outstanding op per fragment)

    def find_any(self, spec, level: int, cb) -> None:
        """Sample one outgoing edge under the member-evaluated filter.

        cb receives ("empty",) | ("fail",) | ("edge", hi, lo, reply).
        An "edge" result has been confirmed outgoing by the far endpoint.
        """
        def gathered(acc):
            s, x = acc
            if s == 0 and x == 0:
                cb(("empty",))
                return
            if x == 0:
                cb(("fail", "bare"))   # cut nonempty but nothing sampled: lower level
                return
            hit = decode_edge(x)
            if hit is None:
                cb(("fail", "crowd"))  # several survivors collided: raise level
                return
            self._verify(hit[0], hit[1], spec_frag=self.host.frag_id(), cb=cb)
        self._start_gather(_FA, spec, level, gathered)

    def cut_probe(self, spec, cb) -> None:
        """cb(empty: bool) via the signed checksum alone."""
        self._start_gather(_PR, spec, 0, lambda acc: cb(acc[0] == 0))

    def min_candidate(self, spec, cb) -> None:
        """cb(None) or cb(((w, hi, lo), insider, outsider)) — not yet verified."""
        self._start_gather(_MN, spec, 0, cb)

    def approx_cut(self, spec, cb) -> None:
        """cb(estimate) with estimate in [k/32, k] w.h.p. for large cuts."""
        def gathered(acc):
            table, degsum = acc
            est = estimate_from_occupancy(table)
            cb(min(est, degsum) if degsum else 0)
        self._start_gather(_OCC, spec, 0, gathered)

    def verify_edge(self, hi: int, lo: int, cb) -> None:
        """Locate the inside endpoint of (hi, lo) and query across the edge.

        cb receives ("edge", hi, lo, insider, reply) when exactly one member
        holds the edge and the far endpoint answers with a foreign fragment,
        else ("fail", reason).
        """
        self._verify(hi, lo, spec_frag=self.host.frag_id(), cb=cb)

    def _verify(self, hi: int, lo: int, spec_frag: int, cb) -> None:
        inv = self._new_inv()
        st = {"kind": "vf", "cb": cb, "hi": hi, "lo": lo, "frag": spec_frag}
        self._op = (inv, st)
        self._handle_vfind(None, inv, hi, lo)

    # ------------------------------------------------------------------
    # gather machinery

    def _start_gather(self, kind: int, spec, level: int, cb) -> None:
        inv = self._new_inv()
        self._op = (inv, {"kind": "g", "cb": cb})
        self._handle_sreq(None, inv, kind, level, spec)

    def _local(self, kind: int, inv, level: int, spec):
        t = self.host.table
        mask = self.host.filter_mask(spec)
        if kind == _FA:
            return t.pull(self._seed(inv), level, mask)
        if kind == _PR:
            s, _ = t.pull(self._seed(inv), 0, mask)
            return (s, 0)
        if kind == _MN:
            got = t.local_min(mask)
            return None if got is None else (got[0], self.host.node_id, got[1])
        reps = self.cfg.cut_estimate_reps
        occ = t.occupancy(self._seed(inv), reps, self.cfg.sketch_levels, mask)
        return (occ, int(mask.sum()))

    @staticmethod
    def _merge(kind: int, a, b):
        if kind in (_FA, _PR):
            return combine(a, b)
        if kind == _MN:
            if a is None:
                return b
            if b is None:
                return a
            return min(a, b)
        return ((a[0] + b[0]) & 0xFFFF, a[1] + b[1])

    def _reply_bits(self, kind: int) -> int:
        if kind == _OCC:
            return self.cfg.cut_estimate_reps * self.cfg.sketch_levels * 16 + 24
        return _KIND_BITS[kind]

    def _handle_sreq(self, src, inv, kind, level, spec) -> None:
        kids = [v for v in self.host.tree_neighbors() if v != src]
        st = {
            "pending": set(kids), "reply_to": src, "kind": kind,
            "acc": self._local(kind, inv, level, spec),
        }
        self._gather[inv] = st
        for v in kids:
            self.host.send(v, self._tag("sreq"), (inv, kind, level, spec),
                           bits=40 + _spec_bits(spec))
        if not st["pending"]:
            self._finish_gather(inv)

    def _handle_srep(self, src, inv, data) -> None:
        st = self._gather.get(inv)
        if st is None:
            return
        st["pending"].discard(src)
        st["acc"] = self._merge(st["kind"], st["acc"], data)
        if not st["pending"]:
            self._finish_gather(inv)

    def _finish_gather(self, inv) -> None:
        st = self._gather.pop(inv)
        dst = st["reply_to"]
        if dst is None:
            op = self._op
            assert op is not None and op[0][1] <= inv[1]
            self._op = None
            op[1]["cb"](st["acc"])
        else:
            self.host.send(dst, self._tag("srep"), (inv, st["acc"]),
                           bits=self._reply_bits(st["kind"]))

    # ------------------------------------------------------------------
    # candidate location + cross-edge confirmation

    def _handle_vfind(self, src, inv, hi, lo) -> None:
        kids = [v for v in self.host.tree_neighbors() if v != src]
        me = self.host.node_id
        other = None
        if me == hi or me == lo:
            want = lo if me == hi else hi
            try:
                self.host.table.index_of(want)
                other = want
            except KeyError:
                other = None
        st = {"pending": set(kids), "reply_to": src, "kind": "vf",
              "acc": (0, None), "await_probe": other is not None}
        self._gather[inv] = st
        for v in kids:
            self.host.send(v, self._tag("vfind"), (inv, hi, lo), bits=76)
        if other is not None:
            self.host.send(other, self._tag("dq"), (inv,), bits=16)
        elif not kids:
            self._finish_vf(inv)

    def _handle_dq(self, src, inv) -> None:
        self.host.send(src, self._tag("dr"), (inv, self.host.probe_reply(src)),
                       bits=102)

    def _handle_dr(self, src, inv, reply) -> None:
        st = self._gather.get(inv)
        if st is None or not st.get("await_probe"):
            return
        st["await_probe"] = False
        self.host.on_probe_reply(src, reply)
        hits, _ = st["acc"]
        st["acc"] = (hits + 1, (self.host.node_id, reply))
        if not st["pending"]:
            self._finish_vf(inv)

    def _handle_vrep(self, src, inv, data) -> None:
        st = self._gather.get(inv)
        if st is None:
            return
        st["pending"].discard(src)
        hits, payload = st["acc"]
        h2, p2 = data
        st["acc"] = (hits + h2, payload if payload is not None else p2)
        if not st["pending"] and not st.get("await_probe"):
            self._finish_vf(inv)

    def _finish_vf(self, inv) -> None:
        st = self._gather.pop(inv)
        dst = st["reply_to"]
        if dst is not None:
            self.host.send(dst, self._tag("vrep"), (inv, st["acc"]), bits=112)
            return
        op = self._op
        self._op = None
        hits, hit = st["acc"]
        ost = op[1]
        if hits != 1 or hit is None:
            ost["cb"](("fail", "ghost"))
            return
        insider, reply = hit
        frag = reply[2]
        if frag is not None and frag == ost["frag"]:
            ost["cb"](("fail", "stale"))   # became internal while in flight
            return
        ost["cb"](("edge", ost["hi"], ost["lo"], insider, reply))

    # ------------------------------------------------------------------
    # event threshold (exact counting, immediate relays)

    def threshold(self, quota: int, cb) -> None:
        inv = self._new_inv()
        self._tleader = [inv, max(1, quota), 0, cb]
        self._handle_tstart(None, inv)

    def note_event(self) -> None:
        """Role hook: one countable event happened at this node."""
        self._events += 1
        self._bump(1)

    def _bump(self, delta: int) -> None:
        if self._tleader is not None:
            self._tleader[2] += delta
            if self._tleader[2] >= self._tleader[1]:
                inv, quota, total, cb = self._tleader
                self._tleader = None
                self._tmember.clear()
                cb(total)
            return
        for inv, dst in list(self._tmember.items()):
            self.host.send(dst, self._tag("cc"), (inv, delta), bits=32)

    def _handle_tstart(self, src, inv) -> None:
        for v in self.host.tree_neighbors():
            if v != src:
                self.host.send(v, self._tag("tstart"), (inv,), bits=16)
        if src is None:
            if self._tleader is not None and self._events:
                self._bump(self._events)
        else:
            self._tmember = {inv: src}
            if self._events:
                self.host.send(src, self._tag("cc"), (inv, self._events), bits=32)

    def _handle_cc(self, src, inv, delta) -> None:
        if self._tleader is not None and self._tleader[0] == inv:
            self._bump(delta)
        elif inv in self._tmember:
            self.host.send(self._tmember[inv], self._tag("cc"), (inv, delta),
                           bits=32)

    # ------------------------------------------------------------------
    # dispatch

    def handle(self, src: int, tag: str, payload) -> None:
        suffix = tag[len(self.p):]
        if suffix == "sreq":
            self._handle_sreq(src, *payload)
        elif suffix == "srep":
            self._handle_srep(src, *payload)
        elif suffix == "vfind":
            self._handle_vfind(src, *payload)
        elif suffix == "vrep":
            self._handle_vrep(src, *payload)
        elif suffix == "dq":
            self._handle_dq(src, *payload)
        elif suffix == "dr":
            self._handle_dr(src, *payload)
        elif suffix == "tstart":
            self._handle_tstart(src, *payload)
        elif suffix == "cc":
            self._handle_cc(src, *payload)
        else:
            raise ValueError(f"unroutable tag {tag}")


def _spec_bits(spec) -> int:
    if spec and isinstance(spec, tuple) and any(isinstance(x, tuple) for x in spec):
        return 80   # carries a weight-key bound
    return 8
