"""Broadcast-tree construction over the election's communication overlay.

The elected leader roots the tree and invites all its graph neighbors in the
first round. From then on, a node that joined in some round sends one batch
of invites over its overlay ports (the ports it heard from during the
election, optionally also the ones it probed); a node outside the tree joins
under the highest-priority inviter it hears in a round. Every node invites
at most once and accepts at most one parent, so no cycles can form.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from d2sim import simcore
from d2sim.election import ElectionOutcome, Priority
from d2sim.graph import Graph
from d2sim.simcore import EngineConfig, Invite, RunTrace, assign_ports


class CoverageFailure(RuntimeError):
    """Some nodes never joined the tree; carries the set left out."""

    def __init__(self, missing):
        super().__init__(f"nodes never joined the tree: {sorted(missing)}")
        self.missing = frozenset(missing)


class NonSpanningTree(ValueError):
    """Payload broadcast needs a tree that reaches every node."""


class OverlayChoice(enum.Enum):
    PSI = "psi"
    PSI_UNION_PHI = "psi-union-phi"


@dataclass
class BroadcastTree:
    root: int
    parent: dict[int, int]
    join_round: dict[int, int]
    height: int
    trace: Optional[RunTrace] = None

    def nodes(self) -> set[int]:
        return {self.root, *self.parent.keys()}

    def children(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {v: [] for v in self.nodes()}
        for child, par in self.parent.items():
            out[par].append(child)
        for lst in out.values():
            lst.sort()
        return out

    def to_dict(self) -> dict:
        return {
            "root": self.root,
            "parents": {str(v): p for v, p in sorted(self.parent.items())},
            "height": self.height,
            "join_rounds": {str(v): r for v, r in sorted(self.join_round.items())},
        }

    def edge_list(self) -> str:
        """Graphviz-friendly ``parent child`` lines."""
        lines = [f"{p} {c}" for c, p in sorted(self.parent.items())]
        return "\n".join(lines) + ("\n" if lines else "")


@dataclass
class _JoinState:
    node_id: int
    degree: int
    my_priority: Priority
    is_root: bool
    invite_ports: tuple[int, ...]
    joined: bool
    parent_port: Optional[int] = None
    join_round: int = -1
    sent: bool = False
    round_no: int = 0


class TreeProtocol:
    """Per-node invite/join state machine run on the engine."""

    def __init__(self, leader: int, overlay_ports: dict[int, tuple[int, ...]]):
        self.leader = leader
        self.overlay_ports = overlay_ports

    def init(self, degree: int, node_id: int) -> _JoinState:
        is_root = node_id == self.leader
        # The root invites over all graph ports; everyone else over the
        # overlay it used during the election.
        ports = (
            tuple(range(1, degree + 1))
            if is_root
            else self.overlay_ports[node_id]
        )
        return _JoinState(
            node_id=node_id,
            degree=degree,
            my_priority=Priority(degree, node_id),
            is_root=is_root,
            invite_ports=ports,
            joined=is_root,
            join_round=0 if is_root else -1,
        )

    def on_round(self, s: _JoinState, inbox):
        s.round_no += 1
        out = []
        if not s.joined:
            best: Optional[Priority] = None
            best_port: Optional[int] = None
            for port, msg in inbox:
                if msg.tag == "invite" and (best is None or msg.priority > best):
                    best = Priority(*msg.priority)
                    best_port = port
            if best is not None:
                s.joined = True
                s.parent_port = best_port
                s.join_round = s.round_no - 1
        if s.joined and not s.sent:
            s.sent = True
            for port in sorted(s.invite_ports):
                out.append((port, Invite(s.my_priority)))
        return s, out

    def is_done(self, s: _JoinState) -> bool:
        return s.joined and s.sent

    def flags(self, s: _JoinState) -> tuple[bool, bool]:
        return False, not s.joined


def build_tree(g: Graph, outcome: ElectionOutcome,
               overlay: OverlayChoice = OverlayChoice.PSI_UNION_PHI,
               max_rounds: Optional[int] = None) -> BroadcastTree:
    """Grow the invite tree from the elected leader.

    Raises CoverageFailure when the chosen overlay leaves nodes unreached
    (possible under plain PSI; the union overlay reaches everyone whenever
    the election itself did).
    """
    union = overlay is OverlayChoice.PSI_UNION_PHI
    overlay_ports = {
        v: tuple(sorted(outcome.overlay_ports(v, union=union))) for v in g.nodes
    }
    ports = assign_ports(g, outcome.seed)
    protocol = TreeProtocol(outcome.leader, overlay_ports)
    trace = simcore.run(
        g,
        protocol,
        outcome.seed,
        EngineConfig(max_rounds=max_rounds, stop_on_quiescence=True),
        ports=ports,
    )
    states: dict[int, _JoinState] = trace.final_states
    missing = {v for v, s in states.items() if not s.joined}
    if missing:
        raise CoverageFailure(missing)
    parent = {}
    join_round = {}
    for v, s in states.items():
        join_round[v] = s.join_round
        if not s.is_root:
            parent[v] = ports.target(v, s.parent_port)
    return BroadcastTree(
        root=outcome.leader,
        parent=parent,
        join_round=join_round,
        height=max(join_round.values()),
        trace=trace,
    )


@dataclass
class TreeReport:
    spanning: bool
    acyclic: bool
    edges_in_graph: bool
    height_consistent: bool
    levels_consistent: bool
    recomputed_height: int
    missing: tuple[int, ...] = ()
    bad_edges: tuple[tuple[int, int], ...] = ()

    @property
    def passed(self) -> bool:
        return (self.spanning and self.acyclic and self.edges_in_graph
                and self.height_consistent and self.levels_consistent)

    def to_dict(self) -> dict:
        return {
            "spanning": self.spanning,
            "acyclic": self.acyclic,
            "edges_in_graph": self.edges_in_graph,
            "height_consistent": self.height_consistent,
            "levels_consistent": self.levels_consistent,
            "recomputed_height": self.recomputed_height,
            "missing": list(self.missing),
            "bad_edges": [list(e) for e in self.bad_edges],
            "pass": self.passed,
        }


def validate_tree(t: BroadcastTree, g: Graph) -> TreeReport:
    """Re-derive every tree property from scratch and compare."""
    tree_nodes = t.nodes()
    missing = tuple(sorted(set(g.nodes) - tree_nodes))
    spanning = not missing and tree_nodes == set(g.nodes)
    bad_edges = tuple(
        (v, p) for v, p in sorted(t.parent.items()) if not g.has_edge(v, p)
    )
    # Walk down from the root over child lists; anything unreached is on a
    # cycle or dangling.
    children = t.children()
    depth = {t.root: 0}
    frontier = [t.root]
    while frontier:
        nxt = []
        for v in frontier:
            for c in children.get(v, ()):
                if c not in depth:
                    depth[c] = depth[v] + 1
                    nxt.append(c)
        frontier = nxt
    acyclic = len(depth) == len(tree_nodes)
    recomputed = max(depth.values()) if depth else 0
    height_consistent = acyclic and recomputed == t.height
    levels_consistent = acyclic and all(
        t.join_round.get(v, -1) == d for v, d in depth.items()
    )
    return TreeReport(
        spanning=spanning,
        acyclic=acyclic,
        edges_in_graph=not bad_edges,
        height_consistent=height_consistent,
        levels_consistent=levels_consistent,
        recomputed_height=recomputed,
        missing=missing,
        bad_edges=bad_edges,
    )


@dataclass
class DeliveryTrace:
    rounds: int
    messages: int
    delivered_per_round: list[tuple[int, ...]]
    payload: object

    def to_dict(self) -> dict:
        return {"rounds": self.rounds, "messages": self.messages}


def broadcast_payload(t: BroadcastTree, payload,
                      g: Optional[Graph] = None) -> DeliveryTrace:
    """Push a payload down the finished tree: height rounds, n-1 messages."""
    if g is not None and t.nodes() != set(g.nodes):
        raise NonSpanningTree("tree does not cover the graph")
    children = t.children()
    reached = {t.root}
    frontier = [t.root]
    per_round: list[tuple[int, ...]] = []
    messages = 0
    while frontier:
        nxt = []
        for v in frontier:
            nxt.extend(children.get(v, ()))
        if not nxt:
            break
        messages += len(nxt)
        reached.update(nxt)
        per_round.append(tuple(sorted(nxt)))
        frontier = nxt
    if len(reached) != len(t.nodes()):
        raise NonSpanningTree("tree has unreachable nodes")
    return DeliveryTrace(
        rounds=len(per_round),
        messages=messages,
        delivered_per_round=per_round,
        payload=payload,
    )
