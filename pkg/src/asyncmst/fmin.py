"""Minimum spanning forest of the dense core, computed per component.

Runs on each component of the core subgraph once its forest tree settles;
the forest tree T (rooted at the terminal leader r) carries all phase
synchronization, so the component advances in lock-step through the phases
of an otherwise asynchronous computation.

Part A (low-diameter fragments): every node starts as a singleton fragment.
Each phase has four root-announced steps:
  search    fragments below the height threshold locate their minimum
            outgoing core edge: local candidate minima convergecast up the
            fragment tree, the winner confirmed by one query across the
            edge, plus a strictly-lighter emptiness probe as an assertion;
  merge     requester must hold Tail, acceptor Head (fair per-fragment,
            per-phase coins from the shared PRF); one grant per Head per
            phase; accepted requesters re-root onto the far endpoint;
  truncate  fragment leaders broadcast depths; a node at a positive
            multiple of (threshold + 1) cuts the edge to its parent unless
            its remaining piece would fall below the threshold;
  check     r aggregates the minimum fragment height and whether anything
            found an outgoing edge, then either starts a new phase or
            moves to Part B.

Completion of every step is aggregated over T. Step markers ride the
fragment trees and are buffered per (phase, step) because they can outrun
the root's broadcast along a different path.

Part B: the Part A fragments freeze into old fragments. Members push
locally-minimal candidate edges (with the far endpoint's old-fragment id,
probed once per neighbor, ever) to their old leaders; old leaders relay
them up T; r runs the remaining Boruvka rounds centrally over old-fragment
ids, filters candidates that its own union-find proves internal, and ships
edge picks, exclusions, and identity updates back down, identity updates
flowing only through old leaders.
"""

from __future__ import annotations

import numpy as np

from asyncmst.fragments import FragmentOps
from asyncmst.sketch import prf

PHASE_SEARCH, PHASE_MERGE, PHASE_TRUNCATE, PHASE_CHECK = range(4)

_NEUTRAL_CHECK = (1 << 30, False, 0)


def _coin_is_head(seed: int, frag: int, phase: int) -> bool:
    return bool(prf(seed, 0xC017, frag, phase) & 1)


class FminRole:
    def __init__(self, node, forest):
        self.node = node
        self.forest = forest
        self.cfg = node.cfg
        self.know = node.know
        self.node_id = node.know.own
        self.us_seed = self.cfg.protocol_seed
        self.sqrt_n = self.cfg.sqrt_n

        self.table = forest.table
        self.known_bad = np.zeros(self.table.size, dtype=bool)
        self.ops = FragmentOps(self, "fm.", self.cfg)

        self.started = False
        self.done = False
        self.tparent: int | None = None
        self.tkids: tuple[int, ...] = ()

        # fragment state
        self.ffrag = self.node_id
        self.fparent: int | None = None
        self.fnbrs: set[int] = set()
        self.height = 0
        self.fmin_edges: set[int] = set()

        # per-phase machinery
        self.phase = 0
        self.step = None
        self.markers: set[tuple[int, int]] = set()
        self.step_done = False
        self.reported = False
        self.kid_reports = 0
        self.min_edge = None
        self.found_flag = False
        self.granted = False
        self.depth = 0
        self._kid_heights: dict[int, int | None] = {}
        self._check_acc = _NEUTRAL_CHECK
        self._crumbs: dict = {}
        self._pending_target: int | None = None

        # Part B
        self.part_b = False
        self.old_frag: int | None = None
        self.oparent: int | None = None
        self.okids: tuple[int, ...] = ()
        self.nbr_old: dict[int, int] = {}
        self.bphase = 0
        self._bcand = None
        self._bfrag_best = None
        self._bkid_cands = 0
        self._bcand_buffer: dict[int, list] = {}
        self._bprobe_pending: int | None = None
        self._breg_acc: list[int] = []
        self._breg_kids = 0
        self._root: _RootState | None = None

    # ------------------------------------------------------------------
    # FragmentOps host API

    def send(self, dst, tag, payload, bits):
        self.node.send(dst, tag, payload, bits=bits, stage="fmin")

    def filter_mask(self, spec):
        mask = ~self.forest.low_mask & ~self.known_bad
        if len(spec) > 1 and spec[1] is not None:
            mask = mask & self.table.range_mask(spec[1])
        return mask

    def tree_neighbors(self):
        return sorted(self.fnbrs)

    def tree_parent(self):
        return self.fparent

    def frag_id(self):
        return self.ffrag

    def probe_reply(self, src):
        return (self.forest.is_high, self.forest.is_star, self.ffrag,
                self.old_frag, self.know.wt[src])

    def on_probe_reply(self, nbr, reply):
        is_high, is_star, frag, old, _ = reply
        idx = self.table.index_of(nbr)
        if not (is_high or is_star) or frag == self.ffrag:
            self.known_bad[idx] = True
        if old is not None:
            self.nbr_old[nbr] = old

    # ------------------------------------------------------------------
    # start-up; wired by the pipeline when the forest tree settles

    def start(self, tparent, tkids):
        self.started = True
        self.tparent = tparent
        self.tkids = tuple(sorted(tkids))
        if tparent is None:
            self._root = _RootState(self)
            self._root.begin_phase()

    # ------------------------------------------------------------------
    # dispatch

    def on_message(self, src, tag, payload):
        if self.ops.handles(tag):
            self.ops.handle(src, tag, payload)
            return
        handler = getattr(self, "_on_" + tag[3:], None)
        if handler is None:
            raise ValueError(f"fmin: unroutable {tag}")
        handler(src, *payload)

    # ------------------------------------------------------------------
    # step sequencing over T

    def _on_phase(self, src, phase, step):
        for v in self.tkids:
            self.send(v, "fm.phase", (phase, step), bits=24)
        self.phase = phase
        self.step = step
        self.step_done = False
        self.reported = False
        self.kid_reports = 0
        self._check_acc = _NEUTRAL_CHECK
        if step == PHASE_SEARCH:
            self.granted = False
        if (phase, step) in self.markers:
            self.markers.discard((phase, step))
            self.step_done = True
        self._run_step()
        self._maybe_report_step()

    def _run_step(self):
        step = self.step
        leader = self.ffrag == self.node_id
        if step == PHASE_SEARCH:
            if leader and not self.step_done:
                if self.height < self.sqrt_n:
                    self._search()
                else:
                    self.min_edge = None
                    self.found_flag = False
                    self._finish_frag_step("fm.fsdone")
        elif step == PHASE_MERGE:
            if leader and not self.step_done:
                head = _coin_is_head(self.us_seed, self.ffrag, self.phase)
                if self.min_edge is not None and not head:
                    self._request_merge()
                else:
                    self._finish_frag_step("fm.fmdone")
        elif step == PHASE_TRUNCATE:
            if leader and not self.step_done:
                self._begin_truncate()
        else:
            self._contribute_check()

    def _mark(self, phase, step):
        if phase == self.phase and step == self.step:
            self.step_done = True
            self._maybe_report_step()
        else:
            self.markers.add((phase, step))

    def _maybe_report_step(self):
        if self.reported or not self.step_done:
            return
        if self.kid_reports < len(self.tkids):
            return
        self.reported = True
        if self.step == PHASE_CHECK:
            if self.tparent is None:
                self._root.check_complete(self._check_acc)
            else:
                self.send(self.tparent, "fm.chk", (self._check_acc,), bits=64)
        elif self.tparent is None:
            self._root.step_complete(self.step)
        else:
            self.send(self.tparent, "fm.sdn", (self.phase, self.step), bits=24)

    def _on_sdn(self, src, phase, step):
        assert phase == self.phase and step == self.step, "phase sync broken"
        self.kid_reports += 1
        self._maybe_report_step()

    def _on_chk(self, src, acc):
        h, f, c = self._check_acc
        self._check_acc = (min(h, acc[0]), f or acc[1], c + acc[2])
        self.kid_reports += 1
        self._maybe_report_step()

    def _contribute_check(self):
        if self.ffrag == self.node_id:
            self._check_acc = (self.height, self.found_flag, 1)
        else:
            self._check_acc = _NEUTRAL_CHECK
        self.step_done = True
        self._maybe_report_step()

    # ------------------------------------------------------------------
    # fragment floods (in-order along fragment edges)

    def _finish_frag_step(self, tag):
        for v in sorted(self.fnbrs):
            self.send(v, tag, (self.phase,), bits=24)
        self._mark(self.phase, _STEP_OF[tag])

    def _forward_frag(self, src, tag, phase):
        for v in sorted(self.fnbrs):
            if v != src:
                self.send(v, tag, (phase,), bits=24)
        self._mark(phase, _STEP_OF[tag])

    def _on_fsdone(self, src, phase):
        self._forward_frag(src, "fm.fsdone", phase)

    def _on_fmdone(self, src, phase):
        self._forward_frag(src, "fm.fmdone", phase)

    def _on_ftdone(self, src, phase):
        self._forward_frag(src, "fm.ftdone", phase)

    # ------------------------------------------------------------------
    # search

    def _search(self):
        self.min_edge = None
        self.found_flag = False
        self.ops.min_candidate(("fm", None), self._candidate_found)

    def _candidate_found(self, cand):
        if cand is None:
            self._finish_frag_step("fm.fsdone")
            return
        key, insider, outsider = cand
        hi, lo = max(insider, outsider), min(insider, outsider)
        self.ops.verify_edge(hi, lo,
                             lambda res: self._candidate_checked(cand, res))

    def _candidate_checked(self, cand, res):
        if res[0] != "edge" or not (res[4][0] or res[4][1]):
            self._search()      # internal, stale, or a low-degree endpoint
            return
        self.min_edge = cand
        self.found_flag = True
        self.ops.cut_probe(("fm", cand[0]), self._lighter_checked)

    def _lighter_checked(self, empty):
        if not empty:
            self._search()      # unreachable unless masks misbehaved
            return
        self._finish_frag_step("fm.fsdone")

    # ------------------------------------------------------------------
    # merge

    def _request_merge(self):
        key, insider, outsider = self.min_edge
        if insider == self.node_id:
            self._pending_target = outsider
            self.send(outsider, "fm.mreq",
                      (self.ffrag, self.phase, self.node_id), bits=80)
        else:
            self._frag_send_domerge(insider, outsider)

    def _frag_send_domerge(self, insider, outsider):
        for v in sorted(self.fnbrs):
            self.send(v, "fm.fdomerge", (insider, outsider, self.phase), bits=80)

    def _on_fdomerge(self, src, insider, outsider, phase):
        for v in sorted(self.fnbrs):
            if v != src:
                self.send(v, "fm.fdomerge", (insider, outsider, phase), bits=80)
        if insider == self.node_id:
            self._pending_target = outsider
            self.send(outsider, "fm.mreq",
                      (self.ffrag, phase, self.node_id), bits=80)

    def _on_mreq(self, src, reqfrag, phase, origin):
        reqid = (reqfrag, origin, phase)
        if self.ffrag == self.node_id:
            self._send_verdict(src, reqid, self._grant(reqfrag, phase))
        else:
            self._crumbs[reqid] = src
            self.send(self.fparent, "fm.mfwd", (reqid,), bits=80)

    def _on_mfwd(self, src, reqid):
        if self.ffrag == self.node_id:
            self._crumbs[reqid] = src
            self._send_verdict(src, reqid, self._grant(reqid[0], reqid[2]))
            self._crumbs.pop(reqid, None)
        else:
            self._crumbs[reqid] = src
            self.send(self.fparent, "fm.mfwd", (reqid,), bits=80)

    def _grant(self, reqfrag, phase):
        head = _coin_is_head(self.us_seed, self.ffrag, phase)
        req_head = _coin_is_head(self.us_seed, reqfrag, phase)
        if (head and not req_head and not self.granted
                and phase == self.phase and reqfrag != self.ffrag):
            self.granted = True
            return self.ffrag
        return None

    def _send_verdict(self, dst, reqid, verdict):
        if verdict is not None and dst == reqid[1]:
            self.fnbrs.add(dst)
            self.fmin_edges.add(dst)
        self.send(dst, "fm.mbak", (reqid, verdict), bits=64)

    def _on_mbak(self, src, reqid, verdict):
        nxt = self._crumbs.pop(reqid, None)
        if nxt is not None:
            self._send_verdict(nxt, reqid, verdict)
            return
        assert reqid[1] == self.node_id, "verdict lost its way"
        self._apply_verdict(reqid, verdict)

    def _apply_verdict(self, reqid, verdict):
        phase = reqid[2]
        if verdict is None:
            if self.ffrag == self.node_id:
                self._finish_frag_step("fm.fmdone")
            else:
                self.send(self.fparent, "fm.mres", (phase,), bits=24)
            return
        target = self._pending_target
        self._pending_target = None
        old_nbrs = sorted(self.fnbrs)
        self.fnbrs.add(target)
        self.fparent = target
        self.fmin_edges.add(target)
        self.ffrag = verdict
        for v in old_nbrs:
            self.send(v, "fm.fadopt", (verdict, phase), bits=64)
        self._mark(phase, PHASE_MERGE)

    def _on_mres(self, src, phase):
        if self.ffrag == self.node_id:
            self._finish_frag_step("fm.fmdone")
        else:
            self.send(self.fparent, "fm.mres", (phase,), bits=24)

    def _on_fadopt(self, src, new_id, phase):
        kids = sorted(self.fnbrs - {src})
        self.fparent = src
        self.ffrag = new_id
        for v in kids:
            self.send(v, "fm.fadopt", (new_id, phase), bits=64)
        self._mark(phase, PHASE_MERGE)

    # ------------------------------------------------------------------
    # truncate

    def _begin_truncate(self):
        self.depth = 0
        kids = sorted(self.fnbrs)
        self._kid_heights = {v: None for v in kids}
        for v in kids:
            self.send(v, "fm.depth", (1, self.phase), bits=24)
        if not kids:
            self._truncate_decide()

    def _on_depth(self, src, d, phase):
        self.depth = d
        kids = sorted(self.fnbrs - {src})
        self._kid_heights = {v: None for v in kids}
        for v in kids:
            self.send(v, "fm.depth", (d + 1, phase), bits=24)
        if not kids:
            self._truncate_decide()

    def _on_height(self, src, h):
        self._kid_heights[src] = h
        if all(v is not None for v in self._kid_heights.values()):
            self._truncate_decide()

    def _on_cutoff(self, src):
        self.fnbrs.discard(src)
        self._kid_heights[src] = -1
        if all(v is not None for v in self._kid_heights.values()):
            self._truncate_decide()

    def _truncate_decide(self):
        stays = [h for h in self._kid_heights.values() if h >= 0]
        piece_h = max(stays) + 1 if stays else 0
        period = self.sqrt_n + 1
        if (self.fparent is not None and self.depth > 0
                and self.depth % period == 0 and piece_h >= self.sqrt_n):
            old_parent = self.fparent
            self.fparent = None
            self.fnbrs.discard(old_parent)
            self.send(old_parent, "fm.cutoff", (), bits=2)
            self.ffrag = self.node_id
            self.height = piece_h
            for v in sorted(self.fnbrs):
                self.send(v, "fm.fadopt2", (self.node_id, self.phase), bits=64)
            self._mark(self.phase, PHASE_TRUNCATE)
        elif self.fparent is not None:
            self.send(self.fparent, "fm.height", (piece_h,), bits=24)
        else:
            self.height = piece_h
            self._finish_frag_step("fm.ftdone")

    def _on_fadopt2(self, src, new_id, phase):
        # a truncation piece keeps its internal orientation; only the id moves
        self.ffrag = new_id
        for v in sorted(self.fnbrs):
            if v != src:
                self.send(v, "fm.fadopt2", (new_id, phase), bits=64)
        self._mark(phase, PHASE_TRUNCATE)

    # ------------------------------------------------------------------
    # Part B

    def _on_pb(self, src):
        for v in self.tkids:
            self.send(v, "fm.pb", (), bits=2)
        self.part_b = True
        self.old_frag = self.ffrag
        self.oparent = self.fparent
        drop = {self.fparent} if self.fparent is not None else set()
        self.okids = tuple(sorted(self.fnbrs - drop))
        self._breg_acc = [self.node_id] if self.old_frag == self.node_id else []
        self._breg_kids = 0
        if not self.tkids:
            self._send_breg()

    def _send_breg(self):
        if self.tparent is None:
            self._root.registered(self._breg_acc)
        else:
            self.send(self.tparent, "fm.breg", (tuple(self._breg_acc),),
                      bits=31 * max(1, len(self._breg_acc)))

    def _on_breg(self, src, ids):
        self._breg_acc.extend(ids)
        self._breg_kids += 1
        if self._breg_kids == len(self.tkids):
            self._send_breg()

    def _on_bphase(self, src, j, edges, excl, idups):
        bits = 40 + 61 * (len(edges) + len(excl)) + 62 * len(idups)
        for v in self.tkids:
            self.send(v, "fm.bphase", (j, edges, excl, idups), bits=bits)
        me = self.node_id
        for hi, lo in edges:
            if me in (hi, lo):
                self.fmin_edges.add(lo if me == hi else hi)
        for hi, lo in excl:
            if me in (hi, lo):
                self.known_bad[self.table.index_of(lo if me == hi else hi)] = True
        if self.old_frag == self.node_id:
            for oldid, newid in idups:
                if oldid == me and newid != self.ffrag:
                    self.ffrag = newid
                    for v in self.okids:
                        self.send(v, "fm.bidup", (newid,), bits=31)
        self.bphase = j
        self._bkid_cands = 0
        self._bcand = None
        self._bfrag_best = None
        for cand in self._bcand_buffer.pop(j, ()):
            self._bfrag_best = _bmin(self._bfrag_best, cand)
            self._bkid_cands += 1
        self._ensure_candidate()

    def _on_bidup(self, src, newid):
        self.ffrag = newid
        for v in self.okids:
            self.send(v, "fm.bidup", (newid,), bits=31)

    def _ensure_candidate(self):
        mask = ~self.forest.low_mask & ~self.known_bad
        got = self.table.local_min(mask)
        if got is None:
            self._bcand = ("none",)
            self._submit_candidate()
            return
        key, nbr = got
        old = self.nbr_old.get(nbr)
        if old is None:
            self._bprobe_pending = nbr
            self.send(nbr, "fm.bdq", (), bits=2)
            return
        if old == self.old_frag:
            # same old fragment then, same fragment forever
            self.known_bad[self.table.index_of(nbr)] = True
            self._ensure_candidate()
            return
        self._bcand = ("cand", key, self.node_id, nbr, old)
        self._submit_candidate()

    def _on_bdq(self, src):
        self.send(src, "fm.bdr",
                  ((self.forest.is_high, self.forest.is_star, self.old_frag),),
                  bits=64)

    def _on_bdr(self, src, info):
        if self._bprobe_pending != src:
            return
        self._bprobe_pending = None
        is_high, is_star, old = info
        if not (is_high or is_star):
            self.known_bad[self.table.index_of(src)] = True
        elif old is not None:
            self.nbr_old[src] = old
        else:
            # core neighbor whose component has not frozen yet; it cannot be
            # in ours, or it would carry our old ids already
            self.known_bad[self.table.index_of(src)] = True
        self._ensure_candidate()

    def _submit_candidate(self):
        self._bfrag_best = _bmin(self._bfrag_best, self._bcand)
        self._maybe_send_bcand()

    def _maybe_send_bcand(self):
        if self._bcand is None or self._bkid_cands < len(self.okids):
            return
        if self.old_frag == self.node_id:
            self._send_bsub((self.old_frag, self._bfrag_best))
        else:
            self.send(self.oparent, "fm.bcand", (self.bphase, self._bfrag_best),
                      bits=150)

    def _on_bcand(self, src, j, cand):
        if j != self.bphase:
            self._bcand_buffer.setdefault(j, []).append(cand)
            return
        self._bfrag_best = _bmin(self._bfrag_best, cand)
        self._bkid_cands += 1
        self._maybe_send_bcand()

    def _send_bsub(self, sub):
        if self.tparent is None:
            self._root.submission(sub)
        else:
            self.send(self.tparent, "fm.bsub", (sub,), bits=150)

    def _on_bsub(self, src, sub):
        self._send_bsub(sub)

    def _on_bdone(self, src):
        for v in self.tkids:
            self.send(v, "fm.bdone", (), bits=2)
        self.done = True
        self.node.on_fmin_complete()


_STEP_OF = {"fm.fsdone": PHASE_SEARCH, "fm.fmdone": PHASE_MERGE,
            "fm.ftdone": PHASE_TRUNCATE}


def _bmin(a, b):
    if a is None or a[0] == "none":
        return b
    if b is None or b[0] == "none":
        return a
    return a if a[1] <= b[1] else b


# ---------------------------------------------------------------------------
# root-side coordination (all local computation, no messages of its own)

class _RootState:
    def __init__(self, role: FminRole):
        self.role = role
        self.phase = 0
        self.bphase = 0
        self.old_ids: list[int] = []
        self.uf: dict[int, int] = {}
        self.subs: dict[int, tuple] = {}
        self.fmin_pairs: set[tuple[int, int]] = set()

    def begin_phase(self):
        self.phase += 1
        self.role._on_phase(None, self.phase, PHASE_SEARCH)

    def step_complete(self, step):
        if step in (PHASE_SEARCH, PHASE_MERGE):
            self.role._on_phase(None, self.phase, step + 1)
        elif step == PHASE_TRUNCATE:
            self.role._on_phase(None, self.phase, PHASE_CHECK)

    def check_complete(self, acc):
        min_h, any_found, _frags = acc
        if min_h >= self.role.sqrt_n or not any_found:
            self.role._on_pb(None)
        else:
            self.begin_phase()

    # -- Part B -------------------------------------------------------------

    def registered(self, ids):
        self.old_ids = sorted(ids)
        self.uf = {i: i for i in self.old_ids}
        self._broadcast((), (), ())

    def _find(self, x):
        while self.uf[x] != x:
            self.uf[x] = self.uf[self.uf[x]]
            x = self.uf[x]
        return x

    def _broadcast(self, edges, excl, idups):
        self.bphase += 1
        self.subs = {}
        self.role._on_bphase(None, self.bphase, tuple(edges), tuple(excl),
                             tuple(idups))

    def submission(self, sub):
        oldid, cand = sub
        self.subs[oldid] = cand
        if len(self.subs) == len(self.old_ids):
            self._resolve()

    def _resolve(self):
        by_group: dict[int, list] = {}
        for oldid in self.old_ids:
            g = self._find(oldid)
            by_group.setdefault(g, [])
            cand = self.subs.get(oldid)
            if cand is not None and cand[0] == "cand":
                by_group[g].append(cand)
        excl: list[tuple[int, int]] = []
        chosen: dict[int, tuple] = {}
        for g, cands in sorted(by_group.items()):
            for c in sorted(cands, key=lambda c: c[1]):
                _, key, u, v, v_old = c
                if self._find(v_old) == g:
                    excl.append((max(u, v), min(u, v)))
                    continue
                chosen[g] = c
                break
        edges: list[tuple[int, int]] = []
        for g, c in sorted(chosen.items()):
            _, key, u, v, v_old = c
            a, b = self._find(g), self._find(v_old)
            if a == b:
                continue
            self.uf[max(a, b)] = min(a, b)
            pair = (max(u, v), min(u, v))
            if pair not in self.fmin_pairs:
                self.fmin_pairs.add(pair)
                edges.append(pair)
        if not edges and not excl:
            self.role._on_bdone(None)
            return
        idups = [(oldid, self._find(oldid)) for oldid in self.old_ids]
        self._broadcast(edges, excl, idups)
