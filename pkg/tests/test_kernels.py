import random
from array import array

import pytest

from d2sim import kernels
from d2sim.graph import generate

from conftest import bf_all_pairs, random_connected_graph

# Known FNV-1a 64-bit vectors.
FNV_VECTORS = [
    (b"", 0xCBF29CE484222325),
    (b"a", 0xAF63DC4C8601EC8C),
    (b"foobar", 0x85944171F73967E8),
]


@pytest.mark.parametrize("data,expected", FNV_VECTORS)
def test_fnv_vectors(data, expected):
    assert kernels.fnv1a64(data) == expected
    assert kernels._fnv1a64_pure(data) == expected


def test_fnv_incremental_matches_one_shot():
    data = bytes(range(256)) * 7
    whole = kernels.fnv1a64(data)
    h = kernels.FNV_OFFSET
    for i in range(0, len(data), 13):
        h = kernels.fnv1a64(data[i:i + 13], h)
    assert h == whole
    h2 = kernels.FNV_OFFSET
    for i in range(0, len(data), 13):
        h2 = kernels._fnv1a64_pure(data[i:i + 13], h2)
    assert h2 == whole


def _csr(nodes, adjacency):
    idx = {v: i for i, v in enumerate(nodes)}
    indptr = array("i", [0])
    indices = array("i")
    for v in nodes:
        for u in sorted(adjacency[v]):
            indices.append(idx[u])
        indptr.append(len(indices))
    return len(nodes), indptr, indices


def test_eccentricities_against_floyd_warshall(rng):
    for trial in range(25):
        n = rng.randrange(2, 14)
        nodes, edges = random_connected_graph(n, rng.randrange(0, 2 * n), rng)
        adj = {v: set() for v in nodes}
        for u, v in edges:
            adj[u].add(v)
            adj[v].add(u)
        dist = bf_all_pairs(nodes, adj)
        want = [max(row) for row in dist]
        got = kernels.eccentricities(*_csr(nodes, adj))
        assert got == want
        got_pure = kernels._eccentricities_pure(*_csr(nodes, adj))
        assert got_pure == want


def test_pure_and_native_agree_on_families():
    for g in [generate("star", n=17), generate("cycle5"),
              generate("complete", n=12), generate("windmill", k=5),
              generate("gnp", n=40, seed=3)]:
        n, indptr, indices = g.csr()
        native = kernels.eccentricities(n, indptr, indices)
        pure = kernels._eccentricities_pure(n, indptr, indices)
        assert native == pure
        assert kernels.is_connected(n, indptr, indices)
        assert kernels._is_connected_pure(n, indptr, indices)


def test_disconnected_detected_both_backends():
    # Two disjoint edges: 0-1, 2-3.
    indptr = array("i", [0, 1, 2, 3, 4])
    indices = array("i", [1, 0, 3, 2])
    assert kernels.eccentricities(4, indptr, indices) is None
    assert kernels._eccentricities_pure(4, indptr, indices) is None
    assert not kernels.is_connected(4, indptr, indices)
    assert not kernels._is_connected_pure(4, indptr, indices)


def test_single_node():
    indptr = array("i", [0, 0])
    indices = array("i")
    assert kernels.eccentricities(1, indptr, indices) == [0]
    assert kernels._eccentricities_pure(1, indptr, indices) == [0]
    assert kernels.is_connected(1, indptr, indices)


def test_backend_reports_a_name():
    assert kernels.backend() in ("native", "pure")
