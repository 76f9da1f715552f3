"""Simulation kernel: delivery order, FIFO, determinism, accounting."""

import pytest

from asyncmst.sim import (
    DelayPolicy, Metrics, Network, make_policy, split_payload, WAKE_TAG,
)


class Script:
    """Actor driven by a list of (on_tag, replies) rules."""

    def __init__(self, net, me, rules=None, wake_sends=None):
        self.net, self.me = net, me
        self.rules = rules or {}
        self.wake_sends = wake_sends or []
        self.got = []

    def on_wake(self):
        for dst, tag in self.wake_sends:
            self.net.send(self.me, dst, tag, stage="t")

    def on_message(self, src, tag, payload):
        self.got.append((self.net.now, src, tag))
        for dst, t2 in self.rules.get(tag, []):
            self.net.send(self.me, dst, t2, stage="t")


def _net(ids, policy="unit", seed=0, trace=False):
    return Network(ids, make_policy(policy, seed, ids), congest_bits=40,
                   trace=trace)


def test_single_message_unit_policy():
    net = _net([1, 2])
    a = Script(net, 1, wake_sends=[(2, "ping")])
    b = Script(net, 2)
    net.add_actor(1, a)
    net.add_actor(2, b)
    net.wake_all()
    m = net.run()
    assert m.sim_time == 1.0
    assert m.logical == 1
    assert b.got == [(1.0, 1, "ping")]


def test_ping_pong_chain_time_equals_k():
    k = 9
    net = _net([1, 2])
    # 1 starts; each receipt triggers one reply until k messages happened
    count = {"n": 0}

    class Pong(Script):
        def on_message(self, src, tag, payload):
            count["n"] += 1
            if count["n"] < k:
                self.net.send(self.me, src, "p", stage="t")

    a = Pong(net, 1, wake_sends=[(2, "p")])
    b = Pong(net, 2)
    net.add_actor(1, a)
    net.add_actor(2, b)
    net.wake_all()
    m = net.run()
    assert m.sim_time == float(k)
    assert m.logical == k


def test_same_seeds_identical_trace_and_metrics():
    def run_once():
        net = _net([3, 5, 9], policy="uniformRandom", seed=7, trace=True)
        actors = {u: Script(net, u, rules={"x": [(v, "y")] })
                  for u, v in ((3, 5), (5, 9), (9, 3))}
        for u in (3, 5, 9):
            actors[u].wake_sends = [(v, "x") for v in (3, 5, 9) if v != u]
            net.add_actor(u, actors[u])
        net.wake_all()
        m = net.run()
        return net.trace, m.to_dict()

    t1, m1 = run_once()
    t2, m2 = run_once()
    assert t1 == t2
    assert m1 == m2


def test_fifo_per_ordered_pair_under_random_delays():
    net = _net([1, 2], policy="uniformRandom", seed=3)

    class Burst(Script):
        def on_wake(self):
            for i in range(50):
                self.net.send(self.me, 2, f"m{i}", stage="t")

    b = Script(net, 2)
    net.add_actor(1, Burst(net, 1))
    net.add_actor(2, b)
    net.wake_all()
    net.run()  # internal FIFO assertion would raise on inversion
    labels = [tag for (_, _, tag) in b.got]
    assert labels == [f"m{i}" for i in range(50)]


def test_delays_stay_in_unit_interval():
    for policy in ("unit", "uniformRandom", "adversarialLag"):
        net = _net(list(range(1, 9)), policy=policy, seed=11, trace=True)
        for u in range(1, 9):
            others = [(v, "z") for v in range(1, 9) if v != u]
            net.add_actor(u, Script(net, u, wake_sends=others))
        net.wake_all()
        m = net.run()
        assert m.halted == "quiescent"
        for (t, src, dst, seq, tag, bits) in net.trace:
            assert 0.0 < t <= 1.0 + 1e-9  # all sends happen at wake here


def test_split_payload_boundaries():
    assert split_payload(40, 40) == 1
    assert split_payload(41, 40) == 2
    # sketch of s words of ceil(log2 n) bits with 4 words per message -> ceil(s/4)
    word = 10
    for s in (1, 4, 5, 11):
        assert split_payload(s * word, 4 * word) == -(-s // 4)


def test_pipelined_fragments_charge_time():
    net = _net([1, 2])
    a = Script(net, 1)
    b = Script(net, 2)
    net.add_actor(1, a)
    net.add_actor(2, b)
    net.wake_all()
    net.run()
    net.send(1, 2, "fat", bits=100, stage="t")  # 3 fragments at 40 bits
    m = net.run()
    assert m.congest >= 3
    assert b.got[-1][0] == pytest.approx(3.0)


def test_event_ceiling_reports_failure_not_crash():
    net = Network([1, 2], DelayPolicy(), congest_bits=40, max_events=10)

    class Loop(Script):
        def on_message(self, src, tag, payload):
            self.net.send(self.me, src, "p", stage="t")

    net.add_actor(1, Loop(net, 1, wake_sends=[(2, "p")]))
    net.add_actor(2, Loop(net, 2))
    net.wake_all()
    m = net.run()
    assert m.halted == "event-ceiling"
    assert m.flags.get("livelock_guard")


def test_knowledge_init_exposes_only_incident_facts():
    from asyncmst.graphs import generate_graph
    from asyncmst.sim import knowledge_init
    g = generate_graph("gnp", 12, seed=5, p=0.4)
    know = knowledge_init(g, n_est=12)
    # star-center style check on the highest-degree node
    center = max(g.ids, key=lambda u: g.degree(u))
    assert set(know[center].nbrs) == set(g.adj[center])
    for u in g.ids:
        k = know[u]
        assert set(k.nbrs) == set(g.adj[u])
        for v in k.nbrs:
            assert k.weight_key(v) == (g.adj[u][v].w, g.adj[u][v].hi, g.adj[u][v].lo)
        # nothing about non-incident edges is reachable through the API
        assert not hasattr(k, "edges")
