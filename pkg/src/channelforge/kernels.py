"""Hot numeric kernels: triangle rasterisation, grid Dijkstra, tube carving.

Every function here is numba-compatible python; the accel.njit decorator
compiles them when numba is enabled and leaves them as plain (slow) python
otherwise. Results are identical in both modes.
"""

import numpy as np

from .accel import njit


# ---------------------------------------------------------------------------
# triangle / box rasterisation


# tolerance for triangle-box touching contact; without it a face lying
# exactly on a cell boundary (bbox-aligned meshes) is dropped by FP noise
RASTER_EPS = 1e-9


@njit
def _axis_overlap(tmin, tmax, half):
    return tmax >= -half - RASTER_EPS and tmin <= half + RASTER_EPS


@njit
def _tri_box_overlap(v0, v1, v2, center, half):
    # Akenine-Moller separating-axis test, box centered at `center` with
    # half-extent `half` in all three axes.
    p0 = np.empty(3)
    p1 = np.empty(3)
    p2 = np.empty(3)
    for a in range(3):
        p0[a] = v0[a] - center[a]
        p1[a] = v1[a] - center[a]
        p2[a] = v2[a] - center[a]

    # box axes
    for a in range(3):
        tmin = min(p0[a], min(p1[a], p2[a]))
        tmax = max(p0[a], max(p1[a], p2[a]))
        if not _axis_overlap(tmin, tmax, half):
            return False

    e0 = p1 - p0
    e1 = p2 - p1
    e2 = p0 - p2

    # triangle normal axis
    n0 = e0[1] * e1[2] - e0[2] * e1[1]
    n1 = e0[2] * e1[0] - e0[0] * e1[2]
    n2 = e0[0] * e1[1] - e0[1] * e1[0]
    d = n0 * p0[0] + n1 * p0[1] + n2 * p0[2]
    r = half * (abs(n0) + abs(n1) + abs(n2))
    tol = RASTER_EPS * (1.0 + abs(n0) + abs(n1) + abs(n2))
    if d > r + tol or d < -r - tol:
        return False

    # nine cross-product axes
    for ei in range(3):
        if ei == 0:
            ex, ey, ez = e0[0], e0[1], e0[2]
        elif ei == 1:
            ex, ey, ez = e1[0], e1[1], e1[2]
        else:
            ex, ey, ez = e2[0], e2[1], e2[2]
        for a in range(3):
            if a == 0:
                ax, ay, az = 0.0, -ez, ey
            elif a == 1:
                ax, ay, az = ez, 0.0, -ex
            else:
                ax, ay, az = -ey, ex, 0.0
            q0 = ax * p0[0] + ay * p0[1] + az * p0[2]
            q1 = ax * p1[0] + ay * p1[1] + az * p1[2]
            q2 = ax * p2[0] + ay * p2[1] + az * p2[2]
            tmin = min(q0, min(q1, q2))
            tmax = max(q0, max(q1, q2))
            rr = half * (abs(ax) + abs(ay) + abs(az))
            tol = RASTER_EPS * (1.0 + abs(ax) + abs(ay) + abs(az))
            if tmin > rr + tol or tmax < -rr - tol:
                return False
    return True


@njit
def _closest_point_on_triangle(p, a, b, c, out):
    # Ericson, Real-Time Collision Detection 5.1.5
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = ab[0] * ap[0] + ab[1] * ap[1] + ab[2] * ap[2]
    d2 = ac[0] * ap[0] + ac[1] * ap[1] + ac[2] * ap[2]
    if d1 <= 0.0 and d2 <= 0.0:
        out[:] = a
        return
    bp = p - b
    d3 = ab[0] * bp[0] + ab[1] * bp[1] + ab[2] * bp[2]
    d4 = ac[0] * bp[0] + ac[1] * bp[1] + ac[2] * bp[2]
    if d3 >= 0.0 and d4 <= d3:
        out[:] = b
        return
    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        v = d1 / (d1 - d3)
        out[:] = a + v * ab
        return
    cp = p - c
    d5 = ab[0] * cp[0] + ab[1] * cp[1] + ab[2] * cp[2]
    d6 = ac[0] * cp[0] + ac[1] * cp[1] + ac[2] * cp[2]
    if d6 >= 0.0 and d5 <= d6:
        out[:] = c
        return
    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        w = d2 / (d2 - d6)
        out[:] = a + w * ac
        return
    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        out[:] = b + w * (c - b)
        return
    denom = 1.0 / (va + vb + vc)
    v = vb * denom
    w = vc * denom
    out[:] = a + ab * v + ac * w


@njit
def rasterize_mesh(tri_verts, origin, h, nx, ny, nz):
    """Mark every cell whose box overlaps a triangle.

    Returns (barrier, inside) where barrier is uint8 occupancy of
    surface-crossed cells and inside flags the barrier cells whose center
    lies on the interior side of the nearest crossing triangle.
    """
    barrier = np.zeros((nx, ny, nz), dtype=np.uint8)
    inside = np.zeros((nx, ny, nz), dtype=np.uint8)
    best_d2 = np.full((nx, ny, nz), np.inf)
    half = 0.5 * h
    center = np.empty(3)
    closest = np.empty(3)

    for t in range(tri_verts.shape[0]):
        v0 = tri_verts[t, 0]
        v1 = tri_verts[t, 1]
        v2 = tri_verts[t, 2]
        # outward normal from winding
        ux = v1[0] - v0[0]
        uy = v1[1] - v0[1]
        uz = v1[2] - v0[2]
        wx = v2[0] - v0[0]
        wy = v2[1] - v0[1]
        wz = v2[2] - v0[2]
        n0 = uy * wz - uz * wy
        n1 = uz * wx - ux * wz
        n2 = ux * wy - uy * wx

        # widen the candidate range by one cell each side; a triangle on a
        # cell boundary belongs to both neighbours and the SAT filters rest
        lo_i = max(0, int(np.floor((min(v0[0], min(v1[0], v2[0])) - origin[0]) / h)) - 1)
        hi_i = min(nx - 1, int(np.floor((max(v0[0], max(v1[0], v2[0])) - origin[0]) / h)) + 1)
        lo_j = max(0, int(np.floor((min(v0[1], min(v1[1], v2[1])) - origin[1]) / h)) - 1)
        hi_j = min(ny - 1, int(np.floor((max(v0[1], max(v1[1], v2[1])) - origin[1]) / h)) + 1)
        lo_k = max(0, int(np.floor((min(v0[2], min(v1[2], v2[2])) - origin[2]) / h)) - 1)
        hi_k = min(nz - 1, int(np.floor((max(v0[2], max(v1[2], v2[2])) - origin[2]) / h)) + 1)

        for i in range(lo_i, hi_i + 1):
            center[0] = origin[0] + h * (i + 0.5)
            for j in range(lo_j, hi_j + 1):
                center[1] = origin[1] + h * (j + 0.5)
                for k in range(lo_k, hi_k + 1):
                    center[2] = origin[2] + h * (k + 0.5)
                    if not _tri_box_overlap(v0, v1, v2, center, half):
                        continue
                    barrier[i, j, k] = 1
                    _closest_point_on_triangle(center, v0, v1, v2, closest)
                    dx = center[0] - closest[0]
                    dy = center[1] - closest[1]
                    dz = center[2] - closest[2]
                    d2 = dx * dx + dy * dy + dz * dz
                    if d2 < best_d2[i, j, k]:
                        best_d2[i, j, k] = d2
                        dot = dx * n0 + dy * n1 + dz * n2
                        inside[i, j, k] = 1 if dot < 1e-12 else 0
    return barrier, inside


# ---------------------------------------------------------------------------
# Dijkstra over the solid voxel graph


@njit
def _heap_push(heap_d, heap_n, size, d, n):
    i = size
    heap_d[i] = d
    heap_n[i] = n
    while i > 0:
        parent = (i - 1) >> 1
        pd = heap_d[parent]
        pn = heap_n[parent]
        if pd < d or (pd == d and pn <= n):
            break
        heap_d[i] = pd
        heap_n[i] = pn
        heap_d[parent] = d
        heap_n[parent] = n
        i = parent
    return size + 1


@njit
def _heap_pop(heap_d, heap_n, size):
    top_d = heap_d[0]
    top_n = heap_n[0]
    size -= 1
    d = heap_d[size]
    n = heap_n[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        right = left + 1
        c = left
        if right < size:
            if heap_d[right] < heap_d[left] or (
                heap_d[right] == heap_d[left] and heap_n[right] < heap_n[left]
            ):
                c = right
        if heap_d[c] < d or (heap_d[c] == d and heap_n[c] < n):
            heap_d[i] = heap_d[c]
            heap_n[i] = heap_n[c]
            i = c
        else:
            break
    heap_d[i] = d
    heap_n[i] = n
    return top_d, top_n, size


@njit
def dijkstra_grid(cost, nx, ny, nz, offsets, step_len, src, dst):
    """Min-cost path between flat voxel indices src and dst.

    cost is the flat per-voxel traversal cost (inf = non-traversable);
    edge weight = step_len * mean of endpoint costs. Tie-breaks by
    (distance, voxel index) so the result is fully deterministic.

    Returns (path, total_cost, reached). path is ordered src..dst.
    """
    n = nx * ny * nz
    dist = np.full(n, np.inf)
    prev = np.full(n, -1, dtype=np.int64)
    done = np.zeros(n, dtype=np.uint8)

    cap = 1 << 14
    heap_d = np.empty(cap)
    heap_n = np.empty(cap, dtype=np.int64)
    size = 0

    dist[src] = 0.0
    size = _heap_push(heap_d, heap_n, size, 0.0, src)

    nk = offsets.shape[0]
    while size > 0:
        d, u, size = _heap_pop(heap_d, heap_n, size)
        if done[u]:
            continue
        done[u] = 1
        if u == dst:
            break
        ui = u // (ny * nz)
        uj = (u // nz) % ny
        uk = u % nz
        cu = cost[u]
        for e in range(nk):
            vi = ui + offsets[e, 0]
            vj = uj + offsets[e, 1]
            vk = uk + offsets[e, 2]
            if vi < 0 or vi >= nx or vj < 0 or vj >= ny or vk < 0 or vk >= nz:
                continue
            v = (vi * ny + vj) * nz + vk
            if done[v]:
                continue
            cv = cost[v]
            if not np.isfinite(cv):
                continue
            nd = d + step_len[e] * 0.5 * (cu + cv)
            if nd < dist[v] or (nd == dist[v] and u < prev[v]):
                dist[v] = nd
                prev[v] = u
                if size >= cap:
                    new_cap = cap * 2
                    nh_d = np.empty(new_cap)
                    nh_n = np.empty(new_cap, dtype=np.int64)
                    nh_d[:cap] = heap_d
                    nh_n[:cap] = heap_n
                    heap_d = nh_d
                    heap_n = nh_n
                    cap = new_cap
                size = _heap_push(heap_d, heap_n, size, nd, v)

    if not done[dst]:
        return np.empty(0, dtype=np.int64), np.inf, False

    # reconstruct
    length = 1
    u = dst
    while u != src:
        u = prev[u]
        length += 1
    path = np.empty(length, dtype=np.int64)
    u = dst
    for i in range(length - 1, -1, -1):
        path[i] = u
        u = prev[u]
    return path, dist[dst], True


# ---------------------------------------------------------------------------
# tube carving


@njit
def carve_tube(occ, polyline, radius_vox):
    """Clear every occupied cell whose center lies within radius_vox of the
    centerline polyline (coordinates in voxel-center units).

    Returns the carved-cell mask.
    """
    nx, ny, nz = occ.shape
    carved = np.zeros((nx, ny, nz), dtype=np.uint8)
    r2 = radius_vox * radius_vox
    for s in range(polyline.shape[0] - 1):
        ax, ay, az = polyline[s, 0], polyline[s, 1], polyline[s, 2]
        bx, by, bz = polyline[s + 1, 0], polyline[s + 1, 1], polyline[s + 1, 2]
        lo_i = max(0, int(np.floor(min(ax, bx) - radius_vox)))
        hi_i = min(nx - 1, int(np.ceil(max(ax, bx) + radius_vox)))
        lo_j = max(0, int(np.floor(min(ay, by) - radius_vox)))
        hi_j = min(ny - 1, int(np.ceil(max(ay, by) + radius_vox)))
        lo_k = max(0, int(np.floor(min(az, bz) - radius_vox)))
        hi_k = min(nz - 1, int(np.ceil(max(az, bz) + radius_vox)))
        ex = bx - ax
        ey = by - ay
        ez = bz - az
        ee = ex * ex + ey * ey + ez * ez
        for i in range(lo_i, hi_i + 1):
            for j in range(lo_j, hi_j + 1):
                for k in range(lo_k, hi_k + 1):
                    if not occ[i, j, k]:
                        continue
                    px = i - ax
                    py = j - ay
                    pz = k - az
                    if ee > 0.0:
                        t = (px * ex + py * ey + pz * ez) / ee
                        if t < 0.0:
                            t = 0.0
                        elif t > 1.0:
                            t = 1.0
                    else:
                        t = 0.0
                    dx = px - t * ex
                    dy = py - t * ey
                    dz = pz - t * ez
                    if dx * dx + dy * dy + dz * dz <= r2:
                        carved[i, j, k] = 1
    return carved
