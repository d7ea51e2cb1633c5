"""Benchmark the compiled DP kernel against the pure-Python fallback.

Usage: python benchmarks/bench_dp.py [n_switches] [reps]
"""

from __future__ import annotations

import statistics
import sys
import time

from rtflow.model import random_topology
from rtflow.solver import WeightedInstance, _dp_py, _scale_w1, _run_kernel
import rtflow.solver as solver


def build_instance(n_switches: int) -> WeightedInstance:
    topo = random_topology("bench", n_switches=n_switches, hosts_per_switch=1)
    edges = sorted(topo.edges.values(), key=lambda e: e.key)
    hosts = topo.hosts()
    return WeightedInstance(
        nodes=tuple(sorted(topo.nodes)),
        edges=tuple(e.key for e in edges),
        w1=tuple(e.delay_ns for e in edges),
        w2=tuple(1 + (e.delay_ns % 7) for e in edges),
        source=hosts[0],
        dest=hosts[-1],
        c1=10**12,
        c2=40,
    )


def time_kernel(instance: WeightedInstance, reps: int) -> float:
    w1i, _, _ = _scale_w1(instance)
    samples = []
    for _ in range(reps):
        start = time.perf_counter()
        _run_kernel(instance, w1i, full_sweeps=True)
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def main():
    n_switches = int(sys.argv[1]) if len(sys.argv) > 1 else 50
    reps = int(sys.argv[2]) if len(sys.argv) > 2 else 5
    instance = build_instance(n_switches)
    print(f"instance: {len(instance.nodes)} nodes, {len(instance.edges)} edges, c2={instance.c2}")

    if solver._dp_fast is None:
        print("compiled kernel unavailable; only the Python fallback will run")
        fast = None
    else:
        fast = time_kernel(instance, reps)
        print(f"cython kernel: {fast * 1e3:.2f} ms (median of {reps})")

    saved = solver._dp_fast
    solver._dp_fast = None
    try:
        slow = time_kernel(instance, reps)
    finally:
        solver._dp_fast = saved
    print(f"python kernel: {slow * 1e3:.2f} ms (median of {reps})")
    if fast:
        print(f"speedup: {slow / fast:.1f}x")


if __name__ == "__main__":
    main()
