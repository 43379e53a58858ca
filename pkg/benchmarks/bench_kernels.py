"""Benchmark the numba kernels against the pure numpy fallback.

Run without arguments to time both backends in fresh subprocesses and
print a comparison table:

    python3 benchmarks/bench_kernels.py

The backend of a process is fixed at import time by INTERLOCK_BACKEND,
so the script re-executes itself with ``--inner`` once per backend.
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

REPEATS = 5


def _workloads():
    from interlock import _kernels
    from interlock.assembly import build_assembly, tiling_from_group
    from interlock.blocking import dbg_geometric
    from interlock.mesh import translate
    from interlock.block import oriented_block

    _kernels.warmup()

    a = oriented_block(0)
    b = translate(oriented_block(2), (0.4, 0.2, 0.1))
    ta = a.corners()
    tb = b.corners()

    rng = np.random.default_rng(7)
    points = rng.uniform(-1.0, 3.0, size=(2000, 3))
    dirs = rng.normal(size=(2000, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)

    assembly = build_assembly(tiling_from_group("p4", 10, 10))

    def tri_cross():
        hits = 0
        for _ in range(400):
            hits += _kernels.tri_cross_any(ta, tb, 1e-9)
        return hits

    def point_dist():
        acc = 0.0
        for p in points:
            acc += _kernels.point_tris_dist(p, ta)
        return acc

    def ray_cast():
        acc = 0
        for p, d in zip(points, dirs):
            hits, _ = _kernels.ray_hits(p, d, ta)
            acc += hits
        return acc

    def geometric_dbg():
        return len(dbg_geometric(assembly, (0.0, 0.0, -1.0)).arcs)

    return {
        "tri_cross_any x400": tri_cross,
        "point_tris_dist x2000": point_dist,
        "ray_hits x2000": ray_cast,
        "dbg_geometric p4 10x10": geometric_dbg,
    }


def run_inner() -> dict:
    from interlock import _kernels

    results = {"backend": _kernels.BACKEND, "timings": {}}
    for name, fn in _workloads().items():
        best = min(_timed(fn) for _ in range(REPEATS))
        results["timings"][name] = best
    return results


def _timed(fn) -> float:
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def run_outer() -> int:
    rows = {}
    for backend in ("numpy", "numba"):
        env = dict(os.environ, INTERLOCK_BACKEND=backend)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--inner"],
            env=env,
            capture_output=True,
            text=True,
        )
        if proc.returncode != 0:
            sys.stderr.write(proc.stderr)
            return proc.returncode
        payload = json.loads(proc.stdout)
        if payload["backend"] != backend:
            sys.stderr.write(f"expected backend {backend}, got {payload['backend']}\n")
            return 1
        rows[backend] = payload["timings"]

    names = list(rows["numpy"])
    width = max(len(n) for n in names)
    print(f"{'workload':<{width}}  {'numpy':>10}  {'numba':>10}  {'speedup':>8}")
    for n in names:
        t_np = rows["numpy"][n]
        t_nb = rows["numba"][n]
        print(f"{n:<{width}}  {t_np * 1e3:>8.2f}ms  {t_nb * 1e3:>8.2f}ms  {t_np / t_nb:>7.1f}x")
    return 0


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--inner", action="store_true", help="time the current backend and emit JSON")
    args = parser.parse_args()
    if args.inner:
        print(json.dumps(run_inner()))
        return 0
    return run_outer()


if __name__ == "__main__":
    sys.exit(main())
