"""Diameter-two graphs: generators, file I/O, and structural checks.

Graphs are immutable after construction, undirected, simple, and connected.
Node ids are arbitrary non-negative integers (generators emit 0..n-1).
"""

from __future__ import annotations

import math
import random
from array import array
from dataclasses import dataclass, field

from d2sim import kernels


class InvalidParams(ValueError):
    """Bad generator family or parameters."""


class GnpRejectionExhausted(RuntimeError):
    """No diameter-<=2 sample found within the attempt budget."""


class DisconnectedGraph(ValueError):
    """Operation requires a connected graph."""


class ParseError(ValueError):
    """Malformed graph file; carries the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class InvariantViolation(ValueError):
    """Graph structure violates a construction invariant."""


class DiameterViolation(ValueError):
    """Graph diameter exceeds what the protocol supports."""


class Graph:
    """Immutable undirected simple connected graph."""

    __slots__ = ("nodes", "adjacency", "n", "label", "_index", "_csr", "_ecc")

    def __init__(self, nodes, edges, label: str = ""):
        node_list = sorted(nodes)
        if not node_list:
            raise InvariantViolation("graph needs at least one node")
        if any(not isinstance(v, int) or v < 0 for v in node_list):
            raise InvariantViolation("node ids must be non-negative integers")
        if len(set(node_list)) != len(node_list):
            raise InvariantViolation("duplicate node ids")
        adj: dict[int, set[int]] = {v: set() for v in node_list}
        for u, v in edges:
            if u == v:
                raise InvariantViolation(f"self-loop at node {u}")
            if u not in adj or v not in adj:
                raise InvariantViolation(f"edge ({u}, {v}) references unknown node")
            if v in adj[u]:
                raise InvariantViolation(f"duplicate edge ({u}, {v})")
            adj[u].add(v)
            adj[v].add(u)
        self.nodes: tuple[int, ...] = tuple(node_list)
        self.adjacency: dict[int, tuple[int, ...]] = {
            v: tuple(sorted(adj[v])) for v in node_list
        }
        self.n = len(node_list)
        self.label = label
        self._index = {v: i for i, v in enumerate(node_list)}
        self._csr = None
        self._ecc = None
        n, indptr, indices = self.csr()
        if not kernels.is_connected(n, indptr, indices):
            raise InvariantViolation("graph is disconnected")

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @property
    def max_degree(self) -> int:
        return max(len(self.adjacency[v]) for v in self.nodes)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency.values()) // 2

    def edges(self):
        for u in self.nodes:
            for v in self.adjacency[u]:
                if u < v:
                    yield (u, v)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency.get(u, ())

    def csr(self):
        """(n, indptr, indices) over node *indices* in sorted-id order."""
        if self._csr is None:
            indptr = array("i", [0])
            indices = array("i")
            for v in self.nodes:
                for u in self.adjacency[v]:
                    indices.append(self._index[u])
                indptr.append(len(indices))
            self._csr = (self.n, indptr, indices)
        return self._csr

    def eccentricities(self) -> list[int]:
        if self._ecc is None:
            ecc = kernels.eccentricities(*self.csr())
            if ecc is None:
                raise DisconnectedGraph("graph is disconnected")
            self._ecc = ecc
        return self._ecc

    def diameter(self) -> int:
        """Exact diameter: max BFS eccentricity over all nodes."""
        return max(self.eccentricities()) if self.n > 1 else 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.nodes == other.nodes and self.adjacency == other.adjacency

    def __hash__(self):
        return hash((self.nodes, tuple(self.adjacency[v] for v in self.nodes)))

    def __repr__(self) -> str:
        tag = f" {self.label!r}" if self.label else ""
        return f"<Graph{tag} n={self.n} m={self.edge_count}>"


@dataclass
class DegreeProfile:
    """Per-node degrees plus the locally-maximal nodes."""

    degrees: dict[int, int]
    max_degree: int
    locally_max: set[int]


def degree_profile(g: Graph) -> DegreeProfile:
    degrees = {v: g.degree(v) for v in g.nodes}
    locally_max = {
        v
        for v in g.nodes
        if all(degrees[v] >= degrees[u] for u in g.neighbors(v))
    }
    return DegreeProfile(degrees, max(degrees.values()), locally_max)


@dataclass
class StructureReport:
    """Structural bounds of a diameter-<=2 graph.

    For every locally-max node v with degree >= 2 (and n > 4) the max degree
    must satisfy max_degree < deg(v)^2. The companion bound is
    max_degree^2 >= n - 1; the 5-cycle attains it with equality, which is why
    the weaker ``>= n`` form is not checked.
    """

    n: int
    max_degree: int
    diameter: int
    local_bound_applies: bool
    local_checks: list[tuple[int, int, bool]] = field(default_factory=list)
    degree_bound_ok: bool = True
    degree_bound_tight: bool = False

    @property
    def local_ok(self) -> bool:
        return all(ok for _, _, ok in self.local_checks)

    @property
    def passed(self) -> bool:
        return self.local_ok and self.degree_bound_ok

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "delta": self.max_degree,
            "diameter": self.diameter,
            "local_bound_applies": self.local_bound_applies,
            "local_checks": [
                {"node": v, "degree": d, "ok": ok} for v, d, ok in self.local_checks
            ],
            "degree_bound_ok": self.degree_bound_ok,
            "degree_bound_tight": self.degree_bound_tight,
            "pass": self.passed,
        }


def structure_check(g: Graph) -> StructureReport:
    """Check the degree bounds that diameter-<=2 graphs must satisfy.

    Failures are recorded in the report, never raised; only the diameter
    precondition raises.
    """
    diam = g.diameter()
    if diam > 2:
        raise DiameterViolation(f"diameter {diam} > 2")
    prof = degree_profile(g)
    delta = prof.max_degree
    report = StructureReport(
        n=g.n,
        max_degree=delta,
        diameter=diam,
        local_bound_applies=g.n > 4,
        degree_bound_ok=delta * delta >= g.n - 1,
        degree_bound_tight=delta * delta == g.n - 1,
    )
    if report.local_bound_applies:
        for v in sorted(prof.locally_max):
            d = prof.degrees[v]
            if d >= 2:
                report.local_checks.append((v, d, delta < d * d))
    return report


def generate(family: str, seed: int = 0, *, n: int | None = None,
             a: int | None = None, b: int | None = None,
             k: int | None = None, p: float | None = None) -> Graph:
    """Build a named-family graph. Deterministic in (family, params, seed)."""
    if family == "star":
        _need(n is not None and n >= 1, "star needs n >= 1")
        return Graph(range(n), [(0, i) for i in range(1, n)], label=f"star({n})")
    if family == "cycle5":
        return Graph(range(5), [(i, (i + 1) % 5) for i in range(5)], label="cycle5")
    if family == "complete":
        _need(n is not None and n >= 1, "complete needs n >= 1")
        edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
        return Graph(range(n), edges, label=f"complete({n})")
    if family == "complete_bipartite":
        if a is None and b is None and n is not None:
            a, b = n // 2, n - n // 2
        _need(a is not None and b is not None and a >= 1 and b >= 1,
              "complete_bipartite needs a >= 1 and b >= 1")
        edges = [(i, a + j) for i in range(a) for j in range(b)]
        return Graph(range(a + b), edges, label=f"complete_bipartite({a},{b})")
    if family == "windmill":
        if k is None and n is not None:
            _need(n >= 3, "windmill needs n >= 3")
            k = (n - 1) // 2
        _need(k is not None and k >= 1, "windmill needs k >= 1")
        edges = []
        for i in range(k):
            u, v = 2 * i + 1, 2 * i + 2
            edges += [(0, u), (0, v), (u, v)]
        return Graph(range(2 * k + 1), edges, label=f"windmill({k})")
    if family == "gnp":
        _need(n is not None and n >= 1, "gnp needs n >= 1")
        return _generate_gnp(n, p, seed)
    raise InvalidParams(f"unknown family {family!r}")


def _need(cond: bool, msg: str):
    if not cond:
        raise InvalidParams(msg)


def gnp_default_p(n: int) -> float:
    """Edge probability floor that makes diameter-2 sampling succeed fast."""
    return min(1.0, math.sqrt(4.0 * math.log(max(n, 2)) / n))


def _generate_gnp(n: int, p: float | None, seed: int) -> Graph:
    floor = gnp_default_p(n)
    if p is None:
        p = floor
    else:
        if not 0.0 < p <= 1.0:
            raise InvalidParams("gnp needs 0 < p <= 1")
        p = max(p, floor)
    rng = random.Random(seed)
    for attempt in range(100):
        edges = _sample_gnp_edges(n, p, rng)
        if _fast_connected_diam2(n, edges):
            return Graph(range(n), edges, label=f"gnp({n},{p:.4g})#{seed}")
    raise GnpRejectionExhausted(
        f"no diameter-<=2 sample for n={n}, p={p:.4g} in 100 attempts"
    )


def _sample_gnp_edges(n: int, p: float, rng: random.Random) -> list[tuple[int, int]]:
    # Geometric skipping: O(m) draws instead of O(n^2).
    edges = []
    if p >= 1.0:
        return [(i, j) for i in range(n) for j in range(i + 1, n)]
    lp = math.log(1.0 - p)
    v, w = 1, -1
    while v < n:
        w += 1 + int(math.log(1.0 - rng.random()) / lp)
        while w >= v and v < n:
            w -= v
            v += 1
        if v < n:
            edges.append((w, v))
    return edges


def _fast_connected_diam2(n: int, edges: list[tuple[int, int]]) -> bool:
    if n == 1:
        return True
    indptr, indices = _csr_from_edges(n, edges)
    if not kernels.is_connected(n, indptr, indices):
        return False
    ecc = kernels.eccentricities(n, indptr, indices)
    return ecc is not None and max(ecc) <= 2


def _csr_from_edges(n: int, edges):
    deg = [0] * n
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    indptr = array("i", [0] * (n + 1))
    for i in range(n):
        indptr[i + 1] = indptr[i] + deg[i]
    cursor = list(indptr[:n])
    indices = array("i", bytes(4 * indptr[n]))
    for u, v in edges:
        indices[cursor[u]] = v
        cursor[u] += 1
        indices[cursor[v]] = u
        cursor[v] += 1
    return indptr, indices


def diameter(g: Graph) -> int:
    """Module-level alias for Graph.diameter()."""
    return g.diameter()


def save(g: Graph, path) -> None:
    """Write the canonical edge-list file: ``n <count>`` then ``u v`` lines."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"n {g.n}\n")
        for u, v in g.edges():
            fh.write(f"{u} {v}\n")


def load(path) -> Graph:
    """Read a graph file written by save(); tolerant of comments and blanks."""
    n = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if n is None:
                if parts[0] != "n" or len(parts) != 2:
                    raise ParseError("expected header 'n <count>'", lineno)
                try:
                    n = int(parts[1])
                except ValueError:
                    raise ParseError("node count is not an integer", lineno) from None
                if n < 1:
                    raise ParseError("node count must be >= 1", lineno)
                continue
            if len(parts) != 2:
                raise ParseError("expected 'u v' edge line", lineno)
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError("edge endpoints are not integers", lineno) from None
            if u == v:
                raise InvariantViolation(f"line {lineno}: self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ParseError(f"edge endpoint out of range 0..{n - 1}", lineno)
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InvariantViolation(f"line {lineno}: duplicate edge {key}")
            seen.add(key)
            edges.append(key)
    if n is None:
        raise ParseError("missing 'n <count>' header", 1)
    return Graph(range(n), edges)


CORPUS_SIZES = (1, 2, 3, 4, 5, 6, 7, 8, 9, 16, 32, 64, 128, 256, 512, 1024)
CORPUS_FAMILIES = ("star", "cycle5", "complete", "complete_bipartite",
                   "windmill", "gnp")


def builtin_corpus(sizes=CORPUS_SIZES, families=CORPUS_FAMILIES, seeds=range(10)):
    """Yield (family, n, seed, graph) over the standard test corpus.

    Fixed families are built once per size and shared across seeds (the seed
    then only drives port assignment); gnp is resampled per seed.
    """
    cache: dict[tuple[str, int], Graph] = {}
    for family in families:
        for n in sizes:
            if family == "cycle5" and n != 5:
                continue
            if family == "complete_bipartite" and n < 2:
                continue
            if family == "windmill" and n < 3:
                continue
            for seed in seeds:
                if family == "gnp":
                    g = generate("gnp", seed=seed, n=n)
                else:
                    key = (family, n)
                    if key not in cache:
                        cache[key] = generate(family, n=n)
                    g = cache[key]
                yield family, n, seed, g
