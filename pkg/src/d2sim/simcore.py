"""Synchronous message-passing engine.

Round semantics: every message emitted in round r is delivered at the start
of round r+1, exactly once, along a graph edge. Nodes address each other
only through local port numbers (1..degree); the port permutation is derived
deterministically from (graph, seed). Inboxes are sorted by
(sender id, message tag), which removes all scheduler nondeterminism and
makes the trace digest reproducible bit-for-bit.

Protocols are duck-typed objects with:

    init(degree, node_id) -> state
    on_round(state, inbox) -> (state, outbox)   # inbox/outbox: [(port, msg)]
    is_done(state) -> bool
    flags(state) -> (candidate, active)

``on_round`` is never called for a node whose state reports done; late
messages to such a node are delivered and absorbed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import NamedTuple, Optional

from d2sim import kernels


class RoundCapExceeded(RuntimeError):
    """The protocol ran past the configured round budget."""


class PortViolation(ValueError):
    """A protocol addressed a port outside 1..degree."""


@dataclass(frozen=True)
class Probe:
    priority: tuple[int, int]
    tag = "probe"

    def arg_str(self) -> str:
        return f"{self.priority[0]},{self.priority[1]}"


@dataclass(frozen=True)
class Update:
    priority: tuple[int, int]
    tag = "update"

    def arg_str(self) -> str:
        return f"{self.priority[0]},{self.priority[1]}"


@dataclass(frozen=True)
class LeaderAnnounce:
    leader: int
    tag = "announce"

    def arg_str(self) -> str:
        return str(self.leader)


@dataclass(frozen=True)
class Invite:
    priority: tuple[int, int]
    tag = "invite"

    def arg_str(self) -> str:
        return f"{self.priority[0]},{self.priority[1]}"


TAG_ORDER = {"probe": 0, "update": 1, "announce": 2, "invite": 3}
TAGS = ("probe", "update", "announce", "invite")


class Envelope(NamedTuple):
    """One in-flight message: sent in ``sent_round``, delivered next round."""

    sent_round: int
    src: int
    dst: int
    payload: object


class PortMap:
    """Per-node bijection between ports 1..degree and neighbors."""

    def __init__(self, order: dict[int, tuple[int, ...]]):
        self._order = order
        self._inverse = {
            v: {u: i + 1 for i, u in enumerate(nbrs)} for v, nbrs in order.items()
        }

    def target(self, v: int, port: int) -> int:
        nbrs = self._order[v]
        if not 1 <= port <= len(nbrs):
            raise PortViolation(f"node {v} has no port {port}")
        return nbrs[port - 1]

    def port_of(self, v: int, neighbor: int) -> int:
        return self._inverse[v][neighbor]

    def neighbors_in_port_order(self, v: int) -> tuple[int, ...]:
        return self._order[v]

    def degree(self, v: int) -> int:
        return len(self._order[v])


def assign_ports(g, seed: int) -> PortMap:
    """Seeded uniform permutation of each node's neighbors."""
    rng = random.Random(seed)
    order = {}
    for v in g.nodes:
        nbrs = list(g.neighbors(v))
        rng.shuffle(nbrs)
        order[v] = tuple(nbrs)
    return PortMap(order)


def default_max_rounds(max_degree: int) -> int:
    return 64 + 8 * log2_ceil(max_degree + 1)


def log2_ceil(x: int) -> int:
    """Smallest k with 2**k >= x (x >= 1)."""
    return (x - 1).bit_length()


@dataclass
class EngineConfig:
    max_rounds: Optional[int] = None
    stop_on_quiescence: bool = False


@dataclass
class RoundMetrics:
    round: int
    sent: dict[str, int]
    candidates: int
    active: int
    cumulative: dict[str, int]
    candidate_ids: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "round": self.round,
            "sent": dict(self.sent),
            "candidates": self.candidates,
            "active": self.active,
            "cum": dict(self.cumulative),
        }


@dataclass
class RunTrace:
    rounds: int
    metrics: list[RoundMetrics]
    final_states: dict
    totals: dict[str, int]
    total_messages: int
    digest: str
    seed: int
    leader: Optional[int] = None

    def export(self) -> dict:
        return {
            "rounds": self.rounds,
            "totals": dict(self.totals),
            "per_round": [m.to_dict() for m in self.metrics],
            "leader": self.leader,
            "digest": self.digest,
        }


def run(g, protocol, seed: int, config: EngineConfig | None = None,
        ports: PortMap | None = None) -> RunTrace:
    """Run ``protocol`` on ``g`` until all nodes are done and no messages
    are in flight (or, with stop_on_quiescence, until a silent round)."""
    config = config or EngineConfig()
    max_rounds = config.max_rounds
    if max_rounds is None:
        max_rounds = default_max_rounds(g.max_degree)
    if ports is None:
        ports = assign_ports(g, seed)
    nodes = g.nodes
    states = {v: protocol.init(g.degree(v), v) for v in nodes}
    done = {v: protocol.is_done(states[v]) for v in nodes}

    inflight: list[Envelope] = []
    digest = kernels.FNV_OFFSET
    totals = {t: 0 for t in TAGS}
    metrics: list[RoundMetrics] = []
    rounds = 0

    while True:
        rounds += 1
        if rounds > max_rounds:
            raise RoundCapExceeded(
                f"no termination within {max_rounds} rounds"
            )
        inboxes: dict[int, list] = {}
        for env in inflight:
            inboxes.setdefault(env.dst, []).append((env.src, env.payload))
        for dst, entries in inboxes.items():
            entries.sort(key=lambda e: (e[0], TAG_ORDER[e[1].tag]))

        outgoing: list[Envelope] = []
        log = bytearray()
        sent = {t: 0 for t in TAGS}
        for v in nodes:
            if done[v]:
                continue  # absorbs any delivered messages
            entries = inboxes.get(v)
            inbox = (
                [(ports.port_of(v, src), msg) for src, msg in entries]
                if entries
                else []
            )
            state, outbox = protocol.on_round(states[v], inbox)
            states[v] = state
            done[v] = protocol.is_done(state)
            for port, msg in outbox:
                dst = ports.target(v, port)
                outgoing.append(Envelope(rounds, v, dst, msg))
                sent[msg.tag] += 1
                log += f"{rounds}:{v}:{dst}:{msg.tag}:{msg.arg_str()}\n".encode()

        digest = kernels.fnv1a64(bytes(log), digest)
        for t in TAGS:
            totals[t] += sent[t]
        candidate_ids = []
        active = 0
        for v in nodes:
            cand, act = protocol.flags(states[v])
            if cand:
                candidate_ids.append(v)
            if act:
                active += 1
        metrics.append(
            RoundMetrics(
                round=rounds,
                sent=sent,
                candidates=len(candidate_ids),
                active=active,
                cumulative=dict(totals),
                candidate_ids=tuple(candidate_ids),
            )
        )
        inflight = outgoing
        if not inflight and (all(done.values()) or config.stop_on_quiescence):
            break

    return RunTrace(
        rounds=rounds,
        metrics=metrics,
        final_states=states,
        totals=totals,
        total_messages=sum(totals.values()),
        digest=f"{digest:016x}",
        seed=seed,
    )
