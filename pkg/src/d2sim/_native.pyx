# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: bitset BFS eccentricities and FNV-1a hashing.

Mirrors the pure-Python implementations in d2sim.kernels; results are
bit-identical.
"""

from libc.stdlib cimport calloc, free
from libc.string cimport memset

cdef extern from *:
    """
    #define POPCNT64(x) __builtin_popcountll(x)
    #define CTZ64(x) __builtin_ctzll(x)
    """
    int POPCNT64(unsigned long long x) nogil
    int CTZ64(unsigned long long x) nogil


def fnv1a64(const unsigned char[:] data, unsigned long long h):
    cdef Py_ssize_t i, m = data.shape[0]
    with nogil:
        for i in range(m):
            h = (h ^ data[i]) * <unsigned long long>0x100000001B3
    return h


cdef unsigned long long* _build_rows(int n, const int[:] indptr,
                                     const int[:] indices, int words) nogil:
    cdef unsigned long long* rows = <unsigned long long*>calloc(n * words, 8)
    cdef int v, k, u
    if rows == NULL:
        return NULL
    for v in range(n):
        for k in range(indptr[v], indptr[v + 1]):
            u = indices[k]
            rows[v * words + (u >> 6)] |= (<unsigned long long>1) << (u & 63)
    return rows


cdef int _bfs(int n, int words, unsigned long long* rows, int src,
              unsigned long long* seen, unsigned long long* frontier,
              unsigned long long* nxt, int* covered_out) nogil:
    """BFS from src; returns eccentricity, or -1 if not all nodes reached."""
    cdef int covered = 1, e = 0, w, wu, u, base
    cdef unsigned long long f, newbits
    cdef int grew
    memset(seen, 0, words * 8)
    memset(frontier, 0, words * 8)
    seen[src >> 6] |= (<unsigned long long>1) << (src & 63)
    frontier[src >> 6] = seen[src >> 6]
    while covered < n:
        memset(nxt, 0, words * 8)
        for w in range(words):
            f = frontier[w]
            base = w << 6
            while f != 0:
                u = base + CTZ64(f)
                f &= f - 1
                for wu in range(words):
                    nxt[wu] |= rows[u * words + wu]
        grew = 0
        for w in range(words):
            newbits = nxt[w] & ~seen[w]
            frontier[w] = newbits
            if newbits != 0:
                grew = 1
                seen[w] |= newbits
                covered += POPCNT64(newbits)
        if not grew:
            covered_out[0] = covered
            return -1
        e += 1
    covered_out[0] = covered
    return e


def eccentricities(int n, const int[:] indptr, const int[:] indices):
    cdef int words = (n + 63) >> 6
    cdef unsigned long long* rows
    cdef unsigned long long* seen
    cdef unsigned long long* frontier
    cdef unsigned long long* nxt
    cdef int v, e, covered
    cdef list out = [0] * n
    cdef bint ok = True
    rows = _build_rows(n, indptr, indices, words)
    seen = <unsigned long long*>calloc(words, 8)
    frontier = <unsigned long long*>calloc(words, 8)
    nxt = <unsigned long long*>calloc(words, 8)
    if rows == NULL or seen == NULL or frontier == NULL or nxt == NULL:
        raise MemoryError()
    try:
        for v in range(n):
            e = _bfs(n, words, rows, v, seen, frontier, nxt, &covered)
            if e < 0:
                ok = False
                break
            out[v] = e
    finally:
        free(rows)
        free(seen)
        free(frontier)
        free(nxt)
    return out if ok else None


def is_connected(int n, const int[:] indptr, const int[:] indices):
    cdef int words = (n + 63) >> 6
    cdef unsigned long long* rows
    cdef unsigned long long* seen
    cdef unsigned long long* frontier
    cdef unsigned long long* nxt
    cdef int covered
    rows = _build_rows(n, indptr, indices, words)
    seen = <unsigned long long*>calloc(words, 8)
    frontier = <unsigned long long*>calloc(words, 8)
    nxt = <unsigned long long*>calloc(words, 8)
    if rows == NULL or seen == NULL or frontier == NULL or nxt == NULL:
        raise MemoryError()
    try:
        _bfs(n, words, rows, 0, seen, frontier, nxt, &covered)
    finally:
        free(rows)
        free(seen)
        free(frontier)
        free(nxt)
    return covered == n
