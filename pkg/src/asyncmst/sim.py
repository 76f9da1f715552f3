"""Deterministic discrete-event kernel for asynchronous message passing.

Model rules enforced here:
  * per ordered (src, dst) pair, messages are numbered and delivered FIFO;
  * every delay lies in (0, 1] (times the fragment count when a payload
    spans several CONGEST messages and pipelined accounting is on);
  * ties in delivery order break on (time, dst, src, seq), so a run is a
    pure function of its seeds;
  * local computation is free; actions happen on wake-up or receipt.
"""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass, field

WAKE_TAG = "wake"


def split_payload(bits: int, congest_bits: int) -> int:
    """Number of CONGEST messages a payload of ``bits`` occupies."""
    if bits < 1:
        raise ValueError("payload must have at least one bit")
    return -(-bits // congest_bits)


# ---------------------------------------------------------------------------
# delay policies

class DelayPolicy:
    """Base: returns a delay in (0, 1] for an envelope src -> dst."""

    name = "unit"

    def delay(self, src: int, dst: int) -> float:
        return 1.0


class UniformRandomDelay(DelayPolicy):
    name = "uniformRandom"

    def __init__(self, seed: int):
        self._rng = random.Random(("sched-uniform", seed).__repr__())

    def delay(self, src: int, dst: int) -> float:
        return self._rng.uniform(0.05, 1.0)


class AdversarialLagDelay(DelayPolicy):
    """Oblivious adversary: a seeded quarter of the nodes sees near-max delays."""

    name = "adversarialLag"

    def __init__(self, seed: int, node_ids):
        rng = random.Random(("sched-adv", seed).__repr__())
        ids = sorted(node_ids)
        k = max(1, len(ids) // 4)
        self.lagged = set(rng.sample(ids, k))
        self._rng = rng

    def delay(self, src: int, dst: int) -> float:
        if src in self.lagged or dst in self.lagged:
            return self._rng.uniform(0.9, 1.0)
        return self._rng.uniform(0.01, 0.1)


def make_policy(name: str, seed: int, node_ids) -> DelayPolicy:
    if name == "unit":
        return DelayPolicy()
    if name == "uniformRandom":
        return UniformRandomDelay(seed)
    if name == "adversarialLag":
        return AdversarialLagDelay(seed, node_ids)
    raise ValueError(f"unknown scheduler policy {name!r}")


# ---------------------------------------------------------------------------
# knowledge handed to a node at wake-up (the KT1 boundary)

class Knowledge:
    """Everything a node may ever read about the graph.

    Own id, neighbor ids, incident edge weights, and the advertised network
    size. Protocol code receives this object and nothing else.
    """

    __slots__ = ("own", "nbrs", "wt", "n_est", "queries")

    def __init__(self, own: int, nbr_weights: dict[int, tuple[int, int, int]], n_est: int):
        self.own = own
        self.nbrs: tuple[int, ...] = tuple(sorted(nbr_weights))
        self.wt = dict(nbr_weights)   # nbr -> (w, hi, lo) comparable key
        self.n_est = n_est
        self.queries = 0

    @property
    def degree(self) -> int:
        return len(self.nbrs)

    def weight_key(self, nbr: int) -> tuple[int, int, int]:
        self.queries += 1
        return self.wt[nbr]


def knowledge_init(graph, n_est: int) -> dict[int, Knowledge]:
    """Seed each node with its id, neighbor ids, and incident weights."""
    out: dict[int, Knowledge] = {}
    for u in graph.ids:
        nw = {v: (e.w, e.hi, e.lo) for v, e in graph.adj[u].items()}
        out[u] = Knowledge(u, nw, n_est)
    return out


# ---------------------------------------------------------------------------
# metrics

@dataclass
class Metrics:
    logical: int = 0
    congest: int = 0
    sim_time: float = 0.0
    events: int = 0
    per_stage: dict = field(default_factory=dict)
    halted: str = "quiescent"
    flags: dict = field(default_factory=dict)

    def note(self, stage: str, frags: int, t: float) -> None:
        s = self.per_stage.get(stage)
        if s is None:
            s = self.per_stage[stage] = {"logical": 0, "congest": 0,
                                         "t_first": t, "t_last": t}
        s["logical"] += 1
        s["congest"] += frags
        if t > s["t_last"]:
            s["t_last"] = t

    def stage_time(self, stage: str) -> float:
        s = self.per_stage.get(stage)
        return 0.0 if s is None else s["t_last"]

    def to_dict(self) -> dict:
        return {
            "logical": self.logical,
            "congest": self.congest,
            "sim_time": self.sim_time,
            "events": self.events,
            "per_stage": self.per_stage,
            "halted": self.halted,
            "flags": self.flags,
        }


# ---------------------------------------------------------------------------
# the network

class Network:
    """Event queue plus the bookkeeping that makes runs reproducible."""

    def __init__(self, node_ids, policy: DelayPolicy, congest_bits: int,
                 pipelined_bits: bool = True, max_events: int = 10_000_000,
                 trace: bool = False):
        self.node_ids = tuple(sorted(node_ids))
        self.policy = policy
        self.congest_bits = congest_bits
        self.pipelined = pipelined_bits
        self.max_events = max_events
        self.actors: dict[int, object] = {}
        self.now = 0.0
        self.metrics = Metrics()
        self.trace: list | None = [] if trace else None

        self._queue: list = []
        self._next_seq: dict[tuple[int, int], int] = {}
        self._last_deliver: dict[tuple[int, int], float] = {}
        self._expect_seq: dict[tuple[int, int], int] = {}
        self._sent = 0
        self._delivered = 0

    def add_actor(self, node_id: int, actor) -> None:
        self.actors[node_id] = actor

    # -- sending ----------------------------------------------------------

    def send(self, src: int, dst: int, tag: str, payload=(), bits: int = 1,
             stage: str = "misc") -> None:
        frags = split_payload(bits, self.congest_bits)
        pair = (src, dst)
        seq = self._next_seq.get(pair, 0) + 1
        self._next_seq[pair] = seq
        delay = self.policy.delay(src, dst)
        if self.pipelined and frags > 1:
            delay += (frags - 1)
        t = self.now + delay
        floor = self._last_deliver.get(pair)
        if floor is not None and t < floor:
            t = floor
        self._last_deliver[pair] = t
        heapq.heappush(self._queue, (t, dst, src, seq, tag, payload, bits, frags))
        self._sent += 1
        m = self.metrics
        m.logical += 1
        m.congest += frags
        m.note(stage.split(".", 1)[0] if "." in stage else stage, frags, t)

    def wake_all(self) -> None:
        for u in self.node_ids:
            heapq.heappush(self._queue, (0.0, u, -1, 0, WAKE_TAG, (), 0, 0))

    # -- running ----------------------------------------------------------

    def run(self, halt=None) -> Metrics:
        q = self._queue
        actors = self.actors
        m = self.metrics
        expect = self._expect_seq
        trace = self.trace
        while q:
            t, dst, src, seq, tag, payload, bits, frags = heapq.heappop(q)
            self.now = t
            m.events += 1
            if tag != WAKE_TAG:
                pair = (src, dst)
                want = expect.get(pair, 0) + 1
                if seq != want:
                    raise AssertionError(
                        f"FIFO violation {src}->{dst}: got {seq}, want {want}")
                expect[pair] = seq
                self._delivered += 1
                if t > m.sim_time:
                    m.sim_time = t
                if trace is not None:
                    trace.append((t, src, dst, seq, tag, bits))
                actors[dst].on_message(src, tag, payload)
            else:
                actors[dst].on_wake()
            if m.events >= self.max_events:
                m.halted = "event-ceiling"
                m.flags["livelock_guard"] = True
                return m
            if halt is not None and halt(self):
                m.halted = "halt-predicate"
                return m
        if self._sent != self._delivered:
            raise AssertionError("message conservation broken")
        m.halted = "quiescent"
        return m
