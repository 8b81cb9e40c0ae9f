import random

import pytest


def bf_all_pairs(nodes, adjacency):
    """Brute-force Floyd-Warshall distances; the test-side oracle for BFS."""
    INF = float("inf")
    idx = {v: i for i, v in enumerate(nodes)}
    n = len(nodes)
    dist = [[0 if i == j else INF for j in range(n)] for i in range(n)]
    for v in nodes:
        for u in adjacency[v]:
            dist[idx[v]][idx[u]] = 1
    for k in range(n):
        dk = dist[k]
        for i in range(n):
            di = dist[i]
            if di[k] == INF:
                continue
            for j in range(n):
                alt = di[k] + dk[j]
                if alt < di[j]:
                    di[j] = alt
    return dist


def bf_diameter(nodes, adjacency):
    dist = bf_all_pairs(nodes, adjacency)
    flat = [d for row in dist for d in row]
    return max(flat)


def random_connected_graph(n, extra_edges, rng: random.Random):
    """Random tree plus extra chords; small-graph generator for tests."""
    nodes = list(range(n))
    edges = set()
    for v in range(1, n):
        u = rng.randrange(v)
        edges.add((u, v))
    attempts = 0
    while len(edges) < n - 1 + extra_edges and attempts < 10 * (extra_edges + 1):
        attempts += 1
        u, v = rng.randrange(n), rng.randrange(n)
        if u == v:
            continue
        edges.add((min(u, v), max(u, v)))
    return nodes, sorted(edges)


@pytest.fixture
def rng():
    return random.Random(12345)
