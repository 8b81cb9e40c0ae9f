"""Deterministic leader election as a per-node state machine.

Every node starts as an active candidate with priority (degree, id) and
probes its ports on a doubling schedule: round i covers ports
2^(i-1) .. min(d, 2^i - 1), so after ceil(log2(d+1)) rounds each neighbor
has been probed exactly once. Whenever a node hears a priority above its
current best it forwards the news to its previous informer, remembers the
new informer, and drops out of the race; it also answers every probe with
the best priority it knows. A node whose best is still its own priority
after its probe loop waits ``loop + slack`` rounds and, if still unbeaten,
announces itself leader. The announcement is flooded once per node over the
ports it communicated with, which makes the election explicit: every node
ends up knowing the winner's id.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from d2sim import simcore
from d2sim.graph import DiameterViolation, Graph
from d2sim.simcore import (
    EngineConfig,
    LeaderAnnounce,
    Probe,
    RunTrace,
    Update,
)


class ProtocolInvariantViolation(RuntimeError):
    """A node observed evidence of two different leaders."""


class Priority(NamedTuple):
    """Election rank: degree first, id breaks ties."""

    degree: int
    node_id: int


DEFAULT_SLACK = 2


def loop_length(d: int) -> int:
    """Number of probe rounds needed to cover d ports: smallest L with
    2^L - 1 >= d."""
    length = 0
    while (1 << length) - 1 < d:
        length += 1
    return length


def probe_targets(i: int, d: int) -> list[int]:
    """Ports probed in loop round i: 2^(i-1) .. min(d, 2^i - 1)."""
    lo = 1 << (i - 1)
    hi = min(d, (1 << i) - 1)
    return list(range(lo, hi + 1))


def wait_length(d: int, slack: int = DEFAULT_SLACK) -> int:
    """Rounds a surviving candidate holds out before announcing."""
    return loop_length(d) + slack


@dataclass
class NodeState:
    node_id: int
    degree: int
    my_priority: Priority
    best: Priority
    informer: Optional[int]  # port that delivered the current best
    phase: str  # "loop" | "wait" | "done"
    loop_i: int
    wait_left: int
    wait_budget: int
    active: bool
    candidate: bool
    elected: bool = False
    leader: Optional[int] = None
    probed_upto: int = 0  # probed ports are always the prefix 1..probed_upto
    heard_from: set[int] = field(default_factory=set)


def init_node(d: int, node_id: int, slack: int = DEFAULT_SLACK) -> NodeState:
    prio = Priority(d, node_id)
    budget = wait_length(d, slack)
    if d == 0:
        return NodeState(
            node_id=node_id, degree=0, my_priority=prio, best=prio,
            informer=None, phase="wait", loop_i=0, wait_left=budget,
            wait_budget=budget, active=False, candidate=True,
        )
    return NodeState(
        node_id=node_id, degree=d, my_priority=prio, best=prio,
        informer=None, phase="loop", loop_i=1, wait_left=0,
        wait_budget=budget, active=True, candidate=True,
    )


def on_round(s: NodeState, inbox) -> tuple[NodeState, list]:
    """One synchronous step; mutates and returns ``s`` with its outbox."""
    out: list[tuple[int, object]] = []
    phase_at_start = s.phase

    # Scan the (sorted) inbox: collect probe senders, the best priority
    # heard, and any leader announcements.
    probe_ports: list[int] = []
    announce_ports: list[int] = []
    announce_id: Optional[int] = None
    best_seen: Optional[Priority] = None
    best_port: Optional[int] = None
    for port, msg in inbox:
        tag = msg.tag
        if tag == "probe" or tag == "update":
            s.heard_from.add(port)
            prio = msg.priority
            if best_seen is None or prio > best_seen:
                best_seen = prio
                best_port = port
            if tag == "probe":
                probe_ports.append(port)
        elif tag == "announce":
            if announce_id is not None and msg.leader != announce_id:
                raise ProtocolInvariantViolation(
                    f"node {s.node_id} heard leaders {announce_id} and {msg.leader}"
                )
            announce_id = msg.leader
            announce_ports.append(port)

    # A strictly higher priority displaces the current best: pass it back to
    # the old informer, remember the new one, and leave the race.
    if best_seen is not None and best_seen > s.best:
        if s.informer is not None and s.informer != best_port:
            out.append((s.informer, Update(best_seen)))
        s.best = best_seen
        s.informer = best_port
        s.active = False
        s.candidate = False

    # Answer every probe with the best priority known right now.
    for port in probe_ports:
        out.append((port, Update(s.best)))

    # Probe the next slice of ports, then advance loop -> wait.
    if phase_at_start == "loop" and s.active:
        targets = probe_targets(s.loop_i, s.degree)
        for port in targets:
            out.append((port, Probe(s.my_priority)))
        if targets:
            s.probed_upto = targets[-1]
        if s.loop_i >= loop_length(s.degree):
            s.phase = "wait"
            s.wait_left = s.wait_budget
            s.active = False
        else:
            s.loop_i += 1

    # Hold-out countdown; an unbeaten candidate announces and exits.
    if phase_at_start == "wait":
        s.wait_left -= 1
        if s.wait_left == 0 and s.best == s.my_priority:
            s.elected = True
            s.leader = s.node_id
            for port in range(1, s.degree + 1):
                out.append((port, LeaderAnnounce(s.node_id)))
            s.phase = "done"

    # First announcement heard: record it, flood it once over every port
    # this node communicated with (except those that clearly know), exit.
    if announce_id is not None:
        if s.leader is not None and s.leader != announce_id:
            raise ProtocolInvariantViolation(
                f"node {s.node_id} elected {s.leader} but heard {announce_id}"
            )
        if s.leader is None:
            s.leader = announce_id
            s.candidate = False
            s.active = False
            told = set(announce_ports)
            targets = (s.heard_from | set(range(1, s.probed_upto + 1))) - told
            for port in sorted(targets):
                out.append((port, LeaderAnnounce(announce_id)))
        s.phase = "done"

    return s, out


class ElectionProtocol:
    """Engine adapter around the node state machine."""

    def __init__(self, slack: int = DEFAULT_SLACK):
        self.slack = slack

    def init(self, degree: int, node_id: int) -> NodeState:
        return init_node(degree, node_id, self.slack)

    def on_round(self, state: NodeState, inbox):
        return on_round(state, inbox)

    def is_done(self, state: NodeState) -> bool:
        return state.phase == "done"

    def flags(self, state: NodeState) -> tuple[bool, bool]:
        return state.candidate, state.active


@dataclass
class ElectConfig:
    slack: int = DEFAULT_SLACK
    max_rounds: Optional[int] = None


@dataclass
class ElectionOutcome:
    leader: int
    views: dict[int, Optional[int]]
    rounds: int
    trace: RunTrace
    psi: dict[int, frozenset[int]]  # ports heard from
    phi: dict[int, frozenset[int]]  # ports probed
    graph: Graph
    seed: int
    slack: int

    def overlay_ports(self, v: int, union: bool = True) -> frozenset[int]:
        return (self.psi[v] | self.phi[v]) if union else self.psi[v]


def elect(g: Graph, seed: int = 0,
          config: ElectConfig | None = None) -> ElectionOutcome:
    """Run the election and return the audited outcome.

    Raises ProtocolInvariantViolation unless exactly one node elected
    itself, it carries the maximum (degree, id) priority, and every node's
    leader view agrees.
    """
    config = config or ElectConfig()
    if g.diameter() > 2:
        raise DiameterViolation(f"diameter {g.diameter()} > 2")
    protocol = ElectionProtocol(config.slack)
    trace = simcore.run(
        g, protocol, seed, EngineConfig(max_rounds=config.max_rounds)
    )
    states: dict[int, NodeState] = trace.final_states
    elected = [v for v, s in states.items() if s.elected]
    if len(elected) != 1:
        raise ProtocolInvariantViolation(f"elected set {elected} is not a singleton")
    leader = elected[0]
    views = {v: states[v].leader for v in g.nodes}
    if any(view != leader for view in views.values()):
        raise ProtocolInvariantViolation(f"leader views disagree: {views}")
    top = max(Priority(g.degree(v), v) for v in g.nodes)
    if leader != top.node_id:
        raise ProtocolInvariantViolation(
            f"elected {leader} but maximum priority is {top}"
        )
    trace.leader = leader
    psi = {v: frozenset(states[v].heard_from) for v in g.nodes}
    phi = {v: frozenset(range(1, states[v].probed_upto + 1)) for v in g.nodes}
    return ElectionOutcome(
        leader=leader, views=views, rounds=trace.rounds, trace=trace,
        psi=psi, phi=phi, graph=g, seed=seed, slack=config.slack,
    )
