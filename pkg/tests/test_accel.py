"""The numba-compiled kernels and the pure-python fallback must produce
identical results. The flag is read at import time, so the fallback runs in
a subprocess."""

import json
import os
import subprocess
import sys
import textwrap

import numpy as np

from channelforge import kernels
from channelforge.router import connectivity_offsets

CHILD = textwrap.dedent(
    """
    import json
    import numpy as np
    from channelforge import accel, kernels
    from channelforge.router import connectivity_offsets

    assert accel.NUMBA_DISABLED

    rng = np.random.default_rng(5)
    dims = (9, 8, 7)
    cost = np.where(rng.random(dims) < 0.3, 1e6, 1.0).reshape(-1)
    offsets, steps = connectivity_offsets(26)
    path, total, reached = kernels.dijkstra_grid(
        cost.copy(), *dims, offsets, steps, 0, dims[0] * dims[1] * dims[2] - 1
    )

    tri = np.array(
        [[[0.0, 0.0, 0.0], [6.0, 0.0, 0.0], [0.0, 6.0, 0.0]],
         [[0.0, 0.0, 4.0], [6.0, 0.0, 4.0], [0.0, 6.0, 4.0]]]
    )
    barrier, inside = kernels.rasterize_mesh(
        tri, np.array([-1.0, -1.0, -1.0]), 1.0, 9, 9, 7
    )

    occ = np.ones((12, 12, 12), dtype=bool)
    poly = np.stack([np.linspace(2, 9, 12)] * 3, axis=1)
    kernels.carve_tube(occ, poly, 1.5)

    print(json.dumps({
        "path": [int(v) for v in path],
        "total": float(total),
        "reached": bool(reached),
        "barrier": [int(x) for x in np.flatnonzero(barrier)],
        "inside": [int(x) for x in np.flatnonzero(inside)],
        "carved": [int(x) for x in np.flatnonzero(~occ)],
    }))
    """
)


def _run_fallback():
    env = dict(os.environ, CHANNELFORGE_NO_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", CHILD], env=env, capture_output=True, text=True,
        check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def test_fallback_matches_numba():
    got = _run_fallback()

    rng = np.random.default_rng(5)
    dims = (9, 8, 7)
    cost = np.where(rng.random(dims) < 0.3, 1e6, 1.0).reshape(-1)
    offsets, steps = connectivity_offsets(26)
    path, total, reached = kernels.dijkstra_grid(
        cost.copy(), *dims, offsets, steps, 0, dims[0] * dims[1] * dims[2] - 1
    )
    assert got["reached"] == bool(reached)
    assert got["total"] == float(total)
    assert got["path"] == [int(v) for v in path]

    tri = np.array(
        [[[0.0, 0.0, 0.0], [6.0, 0.0, 0.0], [0.0, 6.0, 0.0]],
         [[0.0, 0.0, 4.0], [6.0, 0.0, 4.0], [0.0, 6.0, 4.0]]]
    )
    barrier, inside = kernels.rasterize_mesh(
        tri, np.array([-1.0, -1.0, -1.0]), 1.0, 9, 9, 7
    )
    assert got["barrier"] == [int(x) for x in np.flatnonzero(barrier)]
    assert got["inside"] == [int(x) for x in np.flatnonzero(inside)]

    occ = np.ones((12, 12, 12), dtype=bool)
    poly = np.stack([np.linspace(2, 9, 12)] * 3, axis=1)
    kernels.carve_tube(occ, poly, 1.5)
    assert got["carved"] == [int(x) for x in np.flatnonzero(~occ)]


def test_flag_off_in_this_process():
    from channelforge import accel

    # the main suite exercises the numba path unless the flag is exported
    assert accel.NUMBA_DISABLED == (
        os.environ.get("CHANNELFORGE_NO_NUMBA", "").strip() in ("1", "true", "yes")
    )
