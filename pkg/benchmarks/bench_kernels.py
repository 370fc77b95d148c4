"""Benchmark the numba kernels against the pure-python/numpy fallback.

The fallback is selected by the CHANNELFORGE_NO_NUMBA env flag, which must
be set before the package is imported, so this script re-executes itself in
a subprocess for each mode.

Usage: python3 benchmarks/bench_kernels.py
"""

import json
import os
import subprocess
import sys
import time


def run_benchmarks():
    import numpy as np

    from channelforge import kernels
    from channelforge.demo import demo_coral_mesh
    from channelforge.router import connectivity_offsets

    results = {}

    mesh = demo_coral_mesh(resolution_mm=1.2)
    tri = np.ascontiguousarray(mesh.triangle_coords())
    lo, hi = mesh.bbox
    h = 0.9
    origin = (lo - 2 * h).astype(np.float64)
    dims = tuple(int(x) for x in np.ceil((hi - lo) / h).astype(int) + 4)

    # warm-up triggers JIT compilation; excluded from timings
    kernels.rasterize_mesh(tri[:32], origin, h, 8, 8, 8)
    t0 = time.perf_counter()
    barrier, inside = kernels.rasterize_mesh(tri, origin, h, *dims)
    results["rasterize_mesh_s"] = time.perf_counter() - t0

    nx, ny, nz = 40, 40, 40
    rng = np.random.default_rng(7)
    cost = np.where(rng.random((nx, ny, nz)) < 0.2, 1e6, 1.0).reshape(-1)
    offsets, steps = connectivity_offsets(26)
    src, dst = 0, nx * ny * nz - 1
    cost[src] = cost[dst] = 1.0
    kernels.dijkstra_grid(cost[: 4 * 4 * 4].copy(), 4, 4, 4, offsets, steps, 0, 63)
    t0 = time.perf_counter()
    path, total, reached = kernels.dijkstra_grid(cost, nx, ny, nz, offsets, steps, src, dst)
    results["dijkstra_grid_s"] = time.perf_counter() - t0
    results["dijkstra_cost"] = float(total)

    occ = np.ones((80, 80, 80), dtype=bool)
    poly = np.stack(
        [np.linspace(5, 74, 120)] * 3, axis=1
    ).astype(np.float64)
    kernels.carve_tube(occ[:8, :8, :8].copy(), poly[:4], 1.5)
    t0 = time.perf_counter()
    kernels.carve_tube(occ, poly, 2.5)
    results["carve_tube_s"] = time.perf_counter() - t0

    return results


def main():
    if "--child" in sys.argv:
        print(json.dumps(run_benchmarks()))
        return

    rows = {}
    for label, env_flag in (("numba", "0"), ("fallback", "1")):
        env = dict(os.environ, CHANNELFORGE_NO_NUMBA=env_flag)
        out = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--child"],
            env=env, capture_output=True, text=True, check=True,
        )
        rows[label] = json.loads(out.stdout.strip().splitlines()[-1])

    assert rows["numba"]["dijkstra_cost"] == rows["fallback"]["dijkstra_cost"], \
        "accel paths disagree on Dijkstra cost"

    keys = [k for k in rows["numba"] if k.endswith("_s")]
    print(f"{'kernel':<20}{'numba (s)':>12}{'fallback (s)':>14}{'speedup':>10}")
    for k in keys:
        a, b = rows["numba"][k], rows["fallback"][k]
        print(f"{k[:-2]:<20}{a:>12.4f}{b:>14.4f}{b / a:>10.1f}x")


if __name__ == "__main__":
    main()
