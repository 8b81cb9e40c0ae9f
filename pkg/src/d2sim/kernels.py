"""Graph-analysis and hashing kernels.

Two interchangeable backends: a Cython extension (``d2sim._native``) and the
pure-Python implementations below. The native module is picked at import
time when available; set ``D2SIM_PURE=1`` to force the fallback. Both
backends are exact-integer computations, so results are bit-identical.

Graphs are passed as CSR adjacency: ``indptr``/``indices`` arrays of int32
over node indices 0..n-1.
"""

from __future__ import annotations

import os

try:
    from d2sim import _native
except ImportError:
    _native = None

_FORCE_PURE = os.environ.get("D2SIM_PURE", "") not in ("", "0")

FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def backend() -> str:
    """Name of the active backend, ``native`` or ``pure``."""
    return "pure" if (_native is None or _FORCE_PURE) else "native"


def fnv1a64(data: bytes, h: int = FNV_OFFSET) -> int:
    """64-bit FNV-1a over ``data``, continuing from state ``h``."""
    if _native is not None and not _FORCE_PURE:
        return _native.fnv1a64(data, h)
    return _fnv1a64_pure(data, h)


def eccentricities(n: int, indptr, indices) -> list[int] | None:
    """Exact BFS eccentricity of every node; None if disconnected."""
    if n == 0:
        return []
    if _native is not None and not _FORCE_PURE:
        out = _native.eccentricities(n, indptr, indices)
        return None if out is None else list(out)
    return _eccentricities_pure(n, indptr, indices)


def is_connected(n: int, indptr, indices) -> bool:
    """Whether all nodes are reachable from node 0."""
    if n <= 1:
        return True
    if _native is not None and not _FORCE_PURE:
        return bool(_native.is_connected(n, indptr, indices))
    return _is_connected_pure(n, indptr, indices)


def _fnv1a64_pure(data: bytes, h: int = FNV_OFFSET) -> int:
    prime = _FNV_PRIME
    mask = _MASK64
    for b in data:
        h = ((h ^ b) * prime) & mask
    return h


def _adjacency_bits(n: int, indptr, indices) -> list[int]:
    # One big-int bitset per node; CPython's bignum ops make the BFS below
    # word-parallel without any C code.
    rows = [0] * n
    for v in range(n):
        m = 0
        for k in range(indptr[v], indptr[v + 1]):
            m |= 1 << indices[k]
        rows[v] = m
    return rows


def _eccentricities_pure(n: int, indptr, indices) -> list[int] | None:
    rows = _adjacency_bits(n, indptr, indices)
    full = (1 << n) - 1
    eccs = [0] * n
    for v in range(n):
        seen = 1 << v
        frontier = seen
        e = 0
        while seen != full:
            nxt = 0
            f = frontier
            while f:
                low = f & -f
                nxt |= rows[low.bit_length() - 1]
                f ^= low
            new = nxt & ~seen
            if not new:
                return None
            seen |= new
            frontier = new
            e += 1
        eccs[v] = e
    return eccs


def _is_connected_pure(n: int, indptr, indices) -> bool:
    rows = _adjacency_bits(n, indptr, indices)
    seen = 1
    frontier = 1
    while frontier:
        nxt = 0
        f = frontier
        while f:
            low = f & -f
            nxt |= rows[low.bit_length() - 1]
            f ^= low
        frontier = nxt & ~seen
        seen |= frontier
    return seen.bit_count() == n
