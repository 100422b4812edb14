#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the NumPy fallback.

Times the three hot kernels (edge sampling, radius-pair enumeration,
score accumulation) plus the full recovery pipeline on the same
instance, and verifies that both backends produce the identical graph.

    python benchmarks/bench_backends.py --n 50000 --lam 4.0 --d 1
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from gsbm import kernels
from gsbm.profiles import make_step_profile
from gsbm.recovery import label_log_odds, run_exact_recovery
from gsbm.sampler import sample


def timed(fn, repeats=3):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=float, default=50_000.0)
    ap.add_argument("--lam", type=float, default=4.0)
    ap.add_argument("--d", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    if "compiled" not in kernels.available_backends():
        raise SystemExit("compiled backend is not built; nothing to compare")

    profile = make_step_profile(0.9, 0.1, 1.0)
    results: dict[str, dict[str, float]] = {}
    graphs = {}
    for backend in ("compiled", "python"):
        kernels.set_backend(backend)
        rows = {}
        rows["sample"], g = timed(
            lambda: sample(args.lam, args.n, profile, args.d, args.seed), args.repeats
        )
        graphs[backend] = g
        rows["collect_pairs"], _ = timed(
            lambda: kernels.collect_pairs(*g.kernel_args(), False), args.repeats
        )
        rows["tau_all"], _ = timed(
            lambda: label_log_odds(g, g.sigma_star), args.repeats
        )
        rows["recovery"], _ = timed(
            lambda: run_exact_recovery(g, chi=0.37, delta=0.05), args.repeats
        )
        results[backend] = rows
    kernels.set_backend("compiled")

    same = np.array_equal(
        graphs["compiled"].indices, graphs["python"].indices
    ) and np.array_equal(graphs["compiled"].indptr, graphs["python"].indptr)
    g = graphs["compiled"]
    print(f"instance: d={args.d} n={args.n:g} lam={args.lam} "
          f"|V|={g.n_vertices} |E|={g.n_edges}")
    print(f"identical graphs across backends: {same}")
    print(f"{'kernel':<14}{'compiled':>12}{'python':>12}{'speedup':>10}")
    for key in ("sample", "collect_pairs", "tau_all", "recovery"):
        c = results["compiled"][key]
        p = results["python"][key]
        print(f"{key:<14}{c:>11.3f}s{p:>11.3f}s{p / c:>9.1f}x")
    if not same:
        raise SystemExit(1)


if __name__ == "__main__":
    main()
