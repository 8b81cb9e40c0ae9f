#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallbacks.

Times the two hot kernels on representative workloads:
  * eccentricities: all-pairs BFS used by diameter validation (runs on every
    generated graph, 1000+ times in the verification corpus)
  * fnv1a64: the trace digest over a synthetic message log

Usage: python benchmarks/compare_backends.py
"""

import time

from d2sim import kernels
from d2sim.graph import generate


def _time(fn, *args, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_eccentricities():
    print("eccentricities (all-pairs BFS)")
    print(f"{'graph':>28} {'pure':>10} {'native':>10} {'speedup':>8}")
    for g in [
        generate("star", n=1024),
        generate("gnp", n=512, seed=1),
        generate("gnp", n=1024, seed=1),
        generate("complete", n=1024),
    ]:
        n, indptr, indices = g.csr()
        t_pure, ecc_pure = _time(kernels._eccentricities_pure, n, indptr, indices)
        if kernels._native is None:
            print(f"{g!r:>28} {t_pure * 1e3:9.1f}ms {'n/a':>10}")
            continue
        t_nat, ecc_nat = _time(kernels._native.eccentricities, n, indptr, indices)
        assert list(ecc_nat) == ecc_pure
        print(f"{str(g.label):>28} {t_pure * 1e3:9.1f}ms {t_nat * 1e3:9.1f}ms "
              f"{t_pure / t_nat:7.1f}x")


def bench_digest():
    print("\nfnv1a64 (trace digest)")
    log = b"".join(
        f"{r}:{r % 97}:{(r * 31) % 97}:probe:{r % 40},{r % 97}\n".encode()
        for r in range(120_000)
    )
    t_pure, h_pure = _time(kernels._fnv1a64_pure, log)
    print(f"{len(log) / 1e6:26.1f}MB {t_pure * 1e3:9.1f}ms", end="")
    if kernels._native is None:
        print(f" {'n/a':>10}")
        return
    t_nat, h_nat = _time(kernels._native.fnv1a64, log, kernels.FNV_OFFSET)
    assert h_nat == h_pure
    print(f" {t_nat * 1e3:9.1f}ms {t_pure / t_nat:7.1f}x")


if __name__ == "__main__":
    print(f"active backend: {kernels.backend()}")
    bench_eccentricities()
    bench_digest()
