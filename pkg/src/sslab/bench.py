"""Backend benchmark: numba kernels against the pure-Python fallback.

Run ``python -m sslab.bench``; it re-executes itself in two subprocesses,
one per backend (the flag must be set before the package is imported), and
prints wall times for the same seeded workload.
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time


def _inner(sizes: tuple[int, ...], trials: int, solves: int) -> dict:
    import sslab

    t0 = time.perf_counter()
    sslab.run_simulation(sslab.SimulationConfig(sizes, trials=1, seed=0))
    warmup = time.perf_counter() - t0

    t0 = time.perf_counter()
    summary = sslab.run_simulation(
        sslab.SimulationConfig(sizes, trials=trials, seed=123))
    sim = time.perf_counter() - t0

    n = sum(sizes)
    t0 = time.perf_counter()
    for s in range(solves):
        ehm = sslab.sample_ehm(sizes, s)
        sslab.ttc_solve(ehm.market)
    solve = time.perf_counter() - t0

    return {
        "backend": sslab.BACKEND,
        "warmup_s": round(warmup, 4),
        "simulate_s": round(sim, 4),
        "per_trial_ms": round(1000 * sim / trials, 4),
        "solve_s": round(solve, 4),
        "per_solve_ms": round(1000 * solve / solves, 4),
        "n": n,
        "trials": trials,
        "check": round(summary.frac_harmed.mean, 6),
    }


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="sslab.bench")
    p.add_argument("--sizes", default="60,30,10")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--solves", type=int, default=200)
    p.add_argument("--inner", action="store_true", help=argparse.SUPPRESS)
    args = p.parse_args(argv)
    sizes = tuple(int(x) for x in args.sizes.split(","))

    if args.inner:
        print(json.dumps(_inner(sizes, args.trials, args.solves)))
        return 0

    results = []
    for flag in ("0", "1"):
        env = dict(os.environ, SSLAB_NO_NUMBA=flag)
        cmd = [sys.executable, "-m", "sslab.bench", "--inner",
               "--sizes", args.sizes, "--trials", str(args.trials),
               "--solves", str(args.solves)]
        out = subprocess.run(cmd, env=env, capture_output=True, text=True)
        if out.returncode != 0:
            sys.stderr.write(out.stderr)
            return out.returncode
        results.append(json.loads(out.stdout.strip().splitlines()[-1]))

    jit, pure = results
    if jit["check"] != pure["check"]:
        print("WARNING: backends disagree on the workload checksum!")
    print(f"workload: sizes={args.sizes} trials={args.trials} solves={args.solves}")
    print(f"{'':14s}{'numba':>12s}{'pure':>12s}{'speedup':>10s}")
    for key, label in (("simulate_s", "simulate"), ("per_trial_ms", "per trial ms"),
                       ("solve_s", "solve loop"), ("per_solve_ms", "per solve ms")):
        ratio = pure[key] / jit[key] if jit[key] else float("inf")
        print(f"{label:14s}{jit[key]:>12.4f}{pure[key]:>12.4f}{ratio:>9.1f}x")
    print(f"compile+warmup: numba {jit['warmup_s']:.2f}s, pure {pure['warmup_s']:.2f}s")
    print(f"checksum (mean harmed fraction): {jit['check']} == {pure['check']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
