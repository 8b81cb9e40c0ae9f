"""Independent ground truth for the election and its complexity claims.

``reference_replay`` is a deliberately naive, global-view re-implementation
of the election semantics: one flat loop over rounds and nodes, plain dicts,
no engine, no shared code with d2sim.election. It must agree with
``elect()`` on the leader, every node's view, the message totals, and the
trace digest, bit for bit; any divergence is a bug in one of the two.

The checkers in this module turn the protocol's complexity properties into
per-run pass/fail reports with measured constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from d2sim import kernels
from d2sim.graph import DiameterViolation, Graph
from d2sim.simcore import RoundCapExceeded, RunTrace, assign_ports, log2_ceil
from d2sim.election import ElectConfig, ElectionOutcome, ProtocolInvariantViolation

_TAG_RANK = {"probe": 0, "update": 1, "announce": 2}


def expected_leader(g: Graph) -> int:
    """Analytic winner: the node maximizing (degree, id)."""
    return max(g.nodes, key=lambda v: (g.degree(v), v))


@dataclass
class ReplayOutcome:
    leader: int
    views: dict[int, Optional[int]]
    rounds: int
    totals: dict[str, int]
    total_messages: int
    digest: str
    psi: dict[int, frozenset[int]]
    phi: dict[int, frozenset[int]]


def reference_replay(g: Graph, seed: int = 0,
                     config: ElectConfig | None = None) -> ReplayOutcome:
    """Replay the election from a global vantage point.

    Quadratic-time and allocation-happy on purpose: clarity over speed.
    """
    config = config or ElectConfig()
    if g.diameter() > 2:
        raise DiameterViolation(f"diameter {g.diameter()} > 2")
    slack = config.slack
    cap = config.max_rounds
    if cap is None:
        cap = 64 + 8 * log2_ceil(g.max_degree + 1)

    ports = assign_ports(g, seed)
    nodes = list(g.nodes)
    perm = {v: ports.neighbors_in_port_order(v) for v in nodes}
    port_no = {v: {u: i + 1 for i, u in enumerate(perm[v])} for v in nodes}
    deg = {v: g.degree(v) for v in nodes}
    prio = {v: (deg[v], v) for v in nodes}
    n_loop = {v: deg[v].bit_length() for v in nodes}  # ceil(log2(d+1))

    best = dict(prio)
    informer: dict[int, Optional[int]] = {v: None for v in nodes}  # neighbor id
    beaten = {v: False for v in nodes}
    in_wait = {v: deg[v] == 0 for v in nodes}
    step = {v: 1 for v in nodes}
    hold = {v: n_loop[v] + slack for v in nodes}
    probed_count = {v: 0 for v in nodes}
    heard_ids: dict[int, set[int]] = {v: set() for v in nodes}
    view: dict[int, Optional[int]] = {v: None for v in nodes}
    finished = {v: False for v in nodes}
    self_elected = set()

    pending: list[tuple[int, int, str, object]] = []  # (src, dst, tag, arg)
    digest = kernels.FNV_OFFSET
    totals = {"probe": 0, "update": 0, "announce": 0, "invite": 0}
    r = 0
    while True:
        r += 1
        if r > cap:
            raise RoundCapExceeded(f"no termination within {cap} rounds")
        mail: dict[int, list[tuple[int, str, object]]] = {}
        for src, dst, tag, arg in pending:
            mail.setdefault(dst, []).append((src, tag, arg))
        sends: list[tuple[int, int, str, object]] = []
        for v in nodes:
            if finished[v]:
                continue
            inbox = sorted(mail.get(v, ()), key=lambda m: (m[0], _TAG_RANK[m[1]]))
            was_waiting = in_wait[v]

            probers = [src for src, tag, _ in inbox if tag == "probe"]
            tops = [arg for _, tag, arg in inbox if tag in ("probe", "update")]
            announcers = [src for src, tag, _ in inbox if tag == "announce"]
            announced = {arg for _, tag, arg in inbox if tag == "announce"}
            if len(announced) > 1:
                raise ProtocolInvariantViolation(
                    f"node {v} heard leaders {sorted(announced)}"
                )
            for src, tag, _ in inbox:
                if tag in ("probe", "update"):
                    heard_ids[v].add(src)

            if tops:
                hi = max(tops)
                if hi > best[v]:
                    src_of_hi = next(
                        s for s, tag, a in inbox
                        if tag in ("probe", "update") and a == hi
                    )
                    old = informer[v]
                    if old is not None and old != src_of_hi:
                        sends.append((v, old, "update", hi))
                    best[v] = hi
                    informer[v] = src_of_hi
                    beaten[v] = True
            for src in probers:
                sends.append((v, src, "update", best[v]))

            if not was_waiting and not beaten[v]:
                lo = 1 << (step[v] - 1)
                hi_port = min(deg[v], (1 << step[v]) - 1)
                for k in range(lo, hi_port + 1):
                    sends.append((v, perm[v][k - 1], "probe", prio[v]))
                probed_count[v] = max(probed_count[v], hi_port)
                if step[v] >= n_loop[v]:
                    in_wait[v] = True
                else:
                    step[v] += 1

            if was_waiting:
                hold[v] -= 1
                if hold[v] == 0 and not beaten[v]:
                    view[v] = v
                    self_elected.add(v)
                    for u in perm[v]:
                        sends.append((v, u, "announce", v))
                    finished[v] = True

            if announced:
                lid = next(iter(announced))
                if view[v] is not None and view[v] != lid:
                    raise ProtocolInvariantViolation(
                        f"node {v} agreed on {view[v]} but heard {lid}"
                    )
                if view[v] is None:
                    view[v] = lid
                    contacts = set(heard_ids[v])
                    contacts.update(perm[v][:probed_count[v]])
                    contacts.difference_update(announcers)
                    for u in sorted(contacts, key=lambda u: port_no[v][u]):
                        sends.append((v, u, "announce", lid))
                finished[v] = True

        chunk = bytearray()
        for src, dst, tag, arg in sends:
            a = f"{arg[0]},{arg[1]}" if tag in ("probe", "update") else str(arg)
            chunk += f"{r}:{src}:{dst}:{tag}:{a}\n".encode()
            totals[tag] += 1
        digest = kernels.fnv1a64(bytes(chunk), digest)
        pending = sends
        if not pending and all(finished.values()):
            break

    if len(self_elected) != 1:
        raise ProtocolInvariantViolation(f"elected set {sorted(self_elected)}")
    leader = next(iter(self_elected))
    if any(view[v] != leader for v in nodes):
        raise ProtocolInvariantViolation(f"views disagree: {view}")
    if leader != expected_leader(g):
        raise ProtocolInvariantViolation(
            f"elected {leader}, maximum priority node is {expected_leader(g)}"
        )
    psi = {v: frozenset(port_no[v][u] for u in heard_ids[v]) for v in nodes}
    phi = {v: frozenset(range(1, probed_count[v] + 1)) for v in nodes}
    return ReplayOutcome(
        leader=leader, views=view, rounds=r, totals=totals,
        total_messages=sum(totals.values()), digest=f"{digest:016x}",
        psi=psi, phi=phi,
    )


@dataclass
class BoundReport:
    """Measured quantity against a c*n*ceil(log2(delta+1)) + c2-style envelope."""

    name: str
    measured: float
    limit: float
    passed: bool
    fitted: float
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "measured": self.measured,
            "limit": self.limit,
            "pass": self.passed,
            "fitted": round(self.fitted, 6),
            **self.details,
        }


@dataclass
class Kingdom:
    """A candidate plus the neighbors its settled probes have reached."""

    owner: int
    members: frozenset[int]
    settled_index: int


def kingdoms_at(trace: RunTrace, g: Graph, round_index: int,
                ports=None) -> list[Kingdom]:
    """Kingdoms of the candidates still alive at the end of ``round_index``.

    Under one-hop-per-round delivery a probe sent in round r is answered by
    round r+2, so only probes sent up to round r-2 have had their effect by
    the end of round r; the settled frontier index is max(0, r-2), capped by
    each node's own loop length.
    """
    if ports is None:
        ports = assign_ports(g, trace.seed)
    out = []
    candidate_ids = trace.metrics[round_index - 1].candidate_ids
    settled = max(0, round_index - 2)
    for v in candidate_ids:
        d = g.degree(v)
        i = min(settled, d.bit_length())
        reach = min(d, (1 << i) - 1)
        members = frozenset(
            (v,) + ports.neighbors_in_port_order(v)[:reach]
        )
        out.append(Kingdom(owner=v, members=members, settled_index=i))
    return out


def check_kingdoms(trace: RunTrace, g: Graph) -> BoundReport:
    """Territorial decay of the candidate set, round by round.

    Checks, at the end of every round r with settled index i = max(0, r-2):
    the candidates' kingdoms are pairwise disjoint, their sizes sum to at
    most n, and - whenever every candidate has degree >= 2^i - 1 - the
    candidate count is at most ceil(n / 2^i).
    """
    ports = assign_ports(g, trace.seed)
    n = g.n
    worst = 0.0
    failures = []
    for r in range(1, trace.rounds + 1):
        kd = kingdoms_at(trace, g, r, ports)
        total = sum(len(k.members) for k in kd)
        union = set()
        disjoint = True
        for k in kd:
            if union & k.members:
                disjoint = False
            union |= k.members
        if total > n or not disjoint:
            failures.append({"round": r, "sum": total, "disjoint": disjoint})
        worst = max(worst, total / n if n else 0.0)
        i = max(0, r - 2)
        if kd and all(g.degree(k.owner) >= (1 << i) - 1 for k in kd):
            cap = math.ceil(n / (1 << i))
            if len(kd) > cap:
                failures.append({"round": r, "candidates": len(kd), "cap": cap})
    return BoundReport(
        name="kingdoms",
        measured=worst,
        limit=1.0,
        passed=not failures,
        fitted=worst,
        details={"failures": failures},
    )


def check_message_bound(trace: RunTrace, g: Graph, c: float = 12.0,
                        c2: float = 12.0) -> BoundReport:
    """Total messages <= c*n*ceil(log2(delta+1)) + c2*n."""
    n = g.n
    ell = log2_ceil(g.max_degree + 1)
    measured = trace.total_messages
    limit = c * n * ell + c2 * n
    denom = max(1, n * (ell + 1))
    return BoundReport(
        name="messages",
        measured=measured,
        limit=limit,
        passed=measured <= limit,
        fitted=measured / denom,
        details={"n": n, "log2_delta1": ell},
    )


def check_loop_message_bound(trace: RunTrace, g: Graph, c: float = 3.0,
                             c2: float = 3.0) -> BoundReport:
    """Probe + update traffic <= c*n*ceil(log2(delta+1)) + c2*n.

    This is the aggregate form of the per-round cap: responses land one or
    two rounds after their probes here, so only the sum over the whole loop
    phase is meaningful.
    """
    n = g.n
    ell = log2_ceil(g.max_degree + 1)
    measured = trace.totals["probe"] + trace.totals["update"]
    limit = c * n * ell + c2 * n
    denom = max(1, n * (ell + 1))
    return BoundReport(
        name="loop_messages",
        measured=measured,
        limit=limit,
        passed=measured <= limit,
        fitted=measured / denom,
        details={"n": n, "log2_delta1": ell},
    )


def check_round_bound(trace: RunTrace, g: Graph, c: float = 3.0,
                      c2: float = 6.0) -> BoundReport:
    """Total rounds <= c*ceil(log2(delta+1)) + c2."""
    ell = log2_ceil(g.max_degree + 1)
    measured = trace.rounds
    limit = c * ell + c2
    return BoundReport(
        name="rounds",
        measured=measured,
        limit=limit,
        passed=measured <= limit,
        fitted=(measured - c2) / ell if ell else 0.0,
        details={"log2_delta1": ell},
    )


@dataclass
class InfoGraph:
    """Overlay along which the winner's identity travelled."""

    nodes: tuple[int, ...]
    edges: frozenset[tuple[int, int]]
    connected: bool
    diameter: Optional[int]

    def to_dict(self) -> dict:
        return {
            "edges": len(self.edges),
            "connected": self.connected,
            "diameter": self.diameter,
        }


def info_graph(outcome: ElectionOutcome, union: bool = True) -> InfoGraph:
    """Materialize the dissemination overlay and measure it.

    Edges: the leader to all its graph neighbors, plus each node to the
    neighbors behind its overlay ports (heard-from, optionally also probed).
    """
    g = outcome.graph
    ports = assign_ports(g, outcome.seed)
    edges: set[tuple[int, int]] = set()
    for u in g.neighbors(outcome.leader):
        edges.add((min(outcome.leader, u), max(outcome.leader, u)))
    for v in g.nodes:
        for port in outcome.overlay_ports(v, union=union):
            u = ports.target(v, port)
            edges.add((min(v, u), max(v, u)))
    index = {v: i for i, v in enumerate(g.nodes)}
    from array import array

    indptr = array("i", [0])
    adj: dict[int, list[int]] = {v: [] for v in g.nodes}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    indices = array("i")
    for v in g.nodes:
        for u in sorted(adj[v]):
            indices.append(index[u])
        indptr.append(len(indices))
    ecc = kernels.eccentricities(g.n, indptr, indices)
    return InfoGraph(
        nodes=g.nodes,
        edges=frozenset(edges),
        connected=ecc is not None,
        diameter=max(ecc) if ecc else (0 if g.n == 1 else None),
    )
