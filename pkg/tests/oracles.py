"""Independent reference implementations used only by the tests.

These deliberately share no code with the package: the Dijkstra oracle is a
dense label-correcting sweep over numpy array shifts, and the voxelization
oracle classifies voxel centers by ray-crossing parity.
"""

import numpy as np


def dijkstra_oracle(cost: np.ndarray, src, dst, connectivity=26):
    """Minimum accumulated cost from src to dst on a 3D cost grid.

    Bellman-Ford style label correction: relax every neighbour offset over
    the whole grid until no distance improves. Edge weight is the geometric
    step length times the mean of the endpoint costs, matching the contract
    under test but computed with an unrelated algorithm.
    """
    nx, ny, nz = cost.shape
    offsets = []
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dz in (-1, 0, 1):
                if (dx, dy, dz) == (0, 0, 0):
                    continue
                if connectivity == 6 and abs(dx) + abs(dy) + abs(dz) != 1:
                    continue
                offsets.append((dx, dy, dz))

    dist = np.full(cost.shape, np.inf)
    dist[tuple(src)] = 0.0
    finite = np.isfinite(cost)
    for _ in range(nx * ny * nz):
        changed = False
        for dx, dy, dz in offsets:
            step = float(np.sqrt(dx * dx + dy * dy + dz * dz))
            # candidate distance arriving at cell v from v - offset
            shifted = np.full_like(dist, np.inf)
            src_slice = tuple(
                slice(max(0, -d), min(s, s - d))
                for d, s in zip((dx, dy, dz), cost.shape)
            )
            dst_slice = tuple(
                slice(max(0, d), min(s, s + d))
                for d, s in zip((dx, dy, dz), cost.shape)
            )
            w = step * 0.5 * (cost[src_slice] + cost[dst_slice])
            shifted[dst_slice] = dist[src_slice] + w
            shifted[~finite] = np.inf
            better = shifted < dist
            if better.any():
                dist[better] = shifted[better]
                changed = True
        if not changed:
            break
    return float(dist[tuple(dst)])


def parity_inside(mesh, points: np.ndarray) -> np.ndarray:
    """Point-in-mesh test by +x ray-crossing parity (Moller-Trumbore)."""
    tri = mesh.triangle_coords()  # (n, 3, 3)
    v0, v1, v2 = tri[:, 0], tri[:, 1], tri[:, 2]
    e1 = v1 - v0
    e2 = v2 - v0
    d = np.array([1.0, 0.0, 0.0])
    h = np.cross(d, e2)
    a = np.einsum("ij,ij->i", e1, h)
    ok = np.abs(a) > 1e-12
    inside = np.zeros(len(points), dtype=bool)
    for pi, p in enumerate(points):
        s = p - v0
        f = np.where(ok, 1.0 / np.where(ok, a, 1.0), 0.0)
        u = f * np.einsum("ij,ij->i", s, h)
        q = np.cross(s, e1)
        v = f * q[:, 0]  # f * dot(d, q) with d = +x
        t = f * np.einsum("ij,ij->i", q, e2)
        hit = ok & (u >= 0) & (u <= 1) & (v >= 0) & (u + v <= 1) & (t > 1e-9)
        inside[pi] = bool(hit.sum() % 2)
    return inside


def flood_reachable(occ_empty: np.ndarray, start, goal) -> bool:
    """6-connected flood fill over empty cells from start; is goal reached?"""
    from collections import deque

    if not occ_empty[tuple(start)] or not occ_empty[tuple(goal)]:
        return False
    seen = np.zeros_like(occ_empty)
    seen[tuple(start)] = True
    dq = deque([tuple(start)])
    goal = tuple(goal)
    dims = occ_empty.shape
    while dq:
        x, y, z = dq.popleft()
        if (x, y, z) == goal:
            return True
        for dx, dy, dz in ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)):
            n = (x + dx, y + dy, z + dz)
            if all(0 <= c < s for c, s in zip(n, dims)) and occ_empty[n] and not seen[n]:
                seen[n] = True
                dq.append(n)
    return False
