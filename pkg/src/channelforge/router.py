"""Channel centerline routing: segment-wise Dijkstra over the solid voxel
graph with cost marking of previously routed segments."""

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .voxel import VoxelGrid, interior_depth

BLOCK_COST = 1.0e6
DEFAULT_BASE_FRACTION = 0.10
DEFAULT_MIN_WALL_VOXELS = 2


class RoutingError(ValueError):
    pass


class SnapError(RoutingError):
    pass


class UnreachableError(RoutingError):
    def __init__(self, message, src, dst):
        super().__init__(message)
        self.src = int(src)
        self.dst = int(dst)


@dataclass(frozen=True)
class Keypoint:
    position: np.ndarray  # requested world point (mm)
    snapped_index: int  # linear voxel index
    order: int


@dataclass
class CostField:
    """Per-voxel traversal cost; >= 1 on solid voxels, inf on empty ones.
    Voxels of already-routed segments carry exactly BLOCK_COST."""

    cost: np.ndarray  # (nx, ny, nz) float64


@dataclass
class ChannelPath:
    voxels: np.ndarray  # ordered linear voxel indices
    keypoint_marks: list  # positions in `voxels` of each keypoint, increasing
    radius: float  # mm
    segment_costs: list
    length: float  # mm, sum of inter-center distances
    connectivity: int = 26
    clearance_voxels: int = 0

    def polyline(self, grid: VoxelGrid) -> np.ndarray:
        return np.atleast_2d(grid.index_to_world(grid.unlinear(self.voxels)))

    def as_dict(self, grid: VoxelGrid):
        return {
            "voxel_indices": [int(v) for v in self.voxels],
            "polyline_mm": [[float(c) for c in p] for p in self.polyline(grid)],
            "keypoint_marks": [int(m) for m in self.keypoint_marks],
            "radius_mm": self.radius,
            "segment_costs": [float(c) for c in self.segment_costs],
            "length_mm": self.length,
            "connectivity": self.connectivity,
            "clearance_voxels": self.clearance_voxels,
        }


def connectivity_offsets(connectivity: int):
    """Neighbor offsets in deterministic lexicographic order, with their
    geometric step lengths in voxels (1, sqrt(2), sqrt(3))."""
    if connectivity not in (6, 26):
        raise RoutingError("connectivity must be 6 or 26")
    offs = []
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            for dk in (-1, 0, 1):
                if di == dj == dk == 0:
                    continue
                if connectivity == 6 and abs(di) + abs(dj) + abs(dk) != 1:
                    continue
                offs.append((di, dj, dk))
    offs = np.asarray(offs, dtype=np.int64)
    step = np.sqrt((offs.astype(np.float64) ** 2).sum(axis=1))
    return offs, step


def base_height_threshold(grid: VoxelGrid, base_fraction=DEFAULT_BASE_FRACTION):
    """World z below which a voxel center counts as 'in the base'."""
    ks = np.nonzero(grid.occupancy.any(axis=(0, 1)))[0]
    if len(ks) == 0:
        raise RoutingError("grid has no solid voxels")
    z_lo = grid.origin[2] + grid.voxel_size * (ks[0] + 0.5)
    z_hi = grid.origin[2] + grid.voxel_size * (ks[-1] + 0.5)
    return z_lo + base_fraction * (z_hi - z_lo)


def in_base_region(grid: VoxelGrid, lin_index: int, base_fraction=DEFAULT_BASE_FRACTION):
    z = grid.index_to_world(grid.unlinear(int(lin_index)))[2]
    return z <= base_height_threshold(grid, base_fraction) + 1e-9


def snap_keypoints(
    grid: VoxelGrid,
    points,
    snap_radius: float | None = None,
    base_fraction: float = DEFAULT_BASE_FRACTION,
):
    """Snap each world point to the nearest solid voxel center.

    Ties resolve to the lower linear voxel index. The first and last
    points must land in the base region.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if len(points) < 2:
        raise SnapError("need at least 2 keypoints")
    if grid.solid_count == 0:
        raise SnapError("grid has no solid voxels")
    if snap_radius is None:
        snap_radius = 5.0 * grid.voxel_size

    solid_idx = np.argwhere(grid.occupancy)
    solid_lin = grid.linear(solid_idx)
    centers = grid.origin + grid.voxel_size * (solid_idx + 0.5)
    tree = cKDTree(centers)

    kps = []
    for order, p in enumerate(points):
        d, i = tree.query(p, k=min(8, len(centers)))
        d = np.atleast_1d(d)
        i = np.atleast_1d(i)
        if d[0] > snap_radius:
            raise SnapError(
                f"keypoint {order} at {p.tolist()} is {d[0]:.3g} mm from the "
                f"nearest solid voxel (snap radius {snap_radius:.3g} mm)"
            )
        tied = i[d <= d[0] + 1e-9]
        lin = int(solid_lin[tied].min())
        kps.append(Keypoint(position=p.copy(), snapped_index=lin, order=order))

    thr = base_height_threshold(grid, base_fraction)
    for kp in (kps[0], kps[-1]):
        z = grid.index_to_world(grid.unlinear(kp.snapped_index))[2]
        if z > thr + 1e-9:
            raise SnapError(
                f"keypoint {kp.order} (z={z:.3g} mm) is outside the base region "
                f"(z <= {thr:.3g} mm); first and last keypoints must sit in the base"
            )
    return kps


def build_cost_field(grid: VoxelGrid, interior_bias: float = 0.0) -> CostField:
    """cost = 1 + w / (1 + depth), depth = 6-connected distance (voxels)
    of a solid voxel from the nearest empty voxel. w = 0 gives uniform 1."""
    if interior_bias < 0:
        raise RoutingError("interior_bias must be >= 0")
    cost = np.full(grid.dims, np.inf)
    if interior_bias == 0.0:
        cost[grid.occupancy] = 1.0
    else:
        depth = interior_depth(grid.occupancy)
        solid = grid.occupancy
        cost[solid] = 1.0 + interior_bias / (1.0 + depth[solid])
    return CostField(cost=cost)


@dataclass
class Segment:
    voxels: np.ndarray
    cost: float


def route_segment(
    grid: VoxelGrid, costs: CostField, src: int, dst: int, connectivity: int = 26
) -> Segment:
    """Minimum-cost path between two solid voxels (linear indices)."""
    nx, ny, nz = grid.dims
    flat = np.ascontiguousarray(costs.cost.reshape(-1))
    for name, v in (("from", src), ("to", dst)):
        if not np.isfinite(flat[v]):
            raise RoutingError(f"{name} voxel {int(v)} is not traversable")
    offs, step = connectivity_offsets(connectivity)
    path, total, reached = kernels.dijkstra_grid(
        flat, nx, ny, nz, offs, step, int(src), int(dst)
    )
    if not reached:
        raise UnreachableError(
            f"no traversable route between voxels {int(src)} and {int(dst)}", src, dst
        )
    return Segment(voxels=path, cost=float(total))


def _dilate_indices(grid: VoxelGrid, lin_voxels, radius_vox: int):
    """Linear indices within Euclidean radius_vox of any given voxel."""
    if radius_vox <= 0:
        return np.unique(np.asarray(lin_voxels, dtype=np.int64))
    nx, ny, nz = grid.dims
    ijk = np.atleast_2d(grid.unlinear(np.asarray(lin_voxels, dtype=np.int64)))
    r = int(radius_vox)
    ball = []
    for di in range(-r, r + 1):
        for dj in range(-r, r + 1):
            for dk in range(-r, r + 1):
                if di * di + dj * dj + dk * dk <= radius_vox * radius_vox:
                    ball.append((di, dj, dk))
    ball = np.asarray(ball, dtype=np.int64)
    pts = (ijk[:, None, :] + ball[None, :, :]).reshape(-1, 3)
    ok = (
        (pts >= 0).all(axis=1)
        & (pts[:, 0] < nx) & (pts[:, 1] < ny) & (pts[:, 2] < nz)
    )
    return np.unique(grid.linear(pts[ok]))


def default_clearance(radius_mm: float, voxel_size: float) -> int:
    return int(math.ceil(radius_mm / voxel_size)) + 1


def _check_self_proximity(grid, voxels, marks, clearance):
    """Flag path voxels from well-separated path positions that come closer
    than the blocking clearance (voxel units) -- i.e. a later segment was
    forced through an earlier segment's blocked shell, so carved tubes may
    merge. Pairs close in path order, or near a keypoint junction where
    legs legitimately meet, are exempt."""
    if clearance <= 0 or len(voxels) < 3:
        return []
    ijk = np.atleast_2d(grid.unlinear(voxels)).astype(np.float64)
    window = int(math.ceil(4 * clearance)) + 1
    tree = cKDTree(ijk)
    pairs = tree.query_pairs(r=clearance + 1e-9, output_type="ndarray")
    if len(pairs) == 0:
        return []
    junctions = ijk[np.asarray(marks, dtype=int)]
    jtree = cKDTree(junctions)
    bad = []
    for a, b in pairs:
        if abs(int(a) - int(b)) <= window:
            continue
        da = jtree.query(ijk[a])[0]
        db = jtree.query(ijk[b])[0]
        if da <= 2.0 * clearance and db <= 2.0 * clearance:
            continue
        bad.append((int(a), int(b)))
    return bad


def route_channel(
    grid: VoxelGrid,
    keypoints,
    radius_mm: float = 1.0,
    interior_bias: float = 0.0,
    connectivity: int = 26,
    clearance_voxels: int | None = None,
    exact_marks: bool = False,
    cost_field: CostField | None = None,
) -> ChannelPath:
    """Route a continuous non-self-intersecting centerline through the
    ordered keypoints, one Dijkstra segment at a time.

    After each segment its voxels (dilated by clearance_voxels unless
    exact_marks) are marked with BLOCK_COST so later segments avoid them;
    the junction neighbourhood stays open so the next segment can leave.
    """
    if len(keypoints) < 2:
        raise RoutingError("need at least 2 keypoints")
    if clearance_voxels is None:
        clearance_voxels = default_clearance(radius_mm, grid.voxel_size)
    if cost_field is None:
        cost_field = build_cost_field(grid, interior_bias)

    def attempt(clear):
        cost = cost_field.cost.copy()
        flat = cost.reshape(-1)
        voxels = []
        seg_costs = []
        for a, b in zip(keypoints[:-1], keypoints[1:]):
            src, dst = a.snapped_index, b.snapped_index
            try:
                seg = route_segment(
                    grid, CostField(cost=cost), src, dst, connectivity
                )
            except UnreachableError:
                raise UnreachableError(
                    f"no route between keypoint {a.order} and keypoint {b.order}",
                    src,
                    dst,
                )
            if voxels:
                seg_vox = seg.voxels[1:]  # drop duplicated junction voxel
            else:
                seg_vox = seg.voxels
            voxels.append(seg_vox)
            seg_costs.append(seg.cost)

            blocked = (
                seg.voxels
                if exact_marks
                else _dilate_indices(grid, seg.voxels, clear)
            )
            junction = dst
            if exact_marks:
                exempt = np.asarray([junction], dtype=np.int64)
            else:
                near_junction = _dilate_indices(grid, [junction], clear)
                # keep the dilation ring near the junction open, but leave
                # the routed voxels themselves blocked
                exempt = np.setdiff1d(near_junction, seg.voxels, assume_unique=False)
                exempt = np.append(exempt, junction)
            keep = flat[exempt].copy()
            flat[blocked] = BLOCK_COST
            flat[exempt] = keep
        return np.concatenate(voxels), seg_costs

    last_err = None
    for clear in (clearance_voxels, clearance_voxels + 1):
        voxels, seg_costs = attempt(clear)
        # position of each keypoint along the concatenated path
        marks = [0]
        pos = 0
        for sc, kp in zip(seg_costs, keypoints[1:]):
            idx = np.nonzero(voxels[pos:] == kp.snapped_index)[0]
            pos = pos + int(idx[0])
            marks.append(pos)
        if len(np.unique(voxels)) != len(voxels):
            last_err = RoutingError("routed path revisits a voxel")
            continue
        bad = _check_self_proximity(grid, voxels, marks, clear)
        if bad:
            last_err = RoutingError(
                f"path self-proximity at {len(bad)} voxel pairs "
                f"(clearance {clear})"
            )
            continue
        poly = grid.index_to_world(grid.unlinear(voxels))
        length = float(np.linalg.norm(np.diff(np.atleast_2d(poly), axis=0), axis=1).sum())
        return ChannelPath(
            voxels=voxels,
            keypoint_marks=marks,
            radius=radius_mm,
            segment_costs=seg_costs,
            length=length,
            connectivity=connectivity,
            clearance_voxels=clear,
        )
    raise last_err


def validate_path(
    path: ChannelPath,
    grid: VoxelGrid,
    min_wall_voxels: int = DEFAULT_MIN_WALL_VOXELS,
    base_fraction: float = DEFAULT_BASE_FRACTION,
):
    """Check path invariants; returns a list of violation dicts (no raising)."""
    violations = []
    vox = path.voxels
    ijk = np.atleast_2d(grid.unlinear(vox))

    # (a) adjacency under the configured connectivity
    d = np.abs(np.diff(ijk, axis=0))
    if path.connectivity == 6:
        ok = d.sum(axis=1) == 1
    else:
        ok = (d.max(axis=1) == 1) if len(d) else np.ones(0, bool)
    for i in np.nonzero(~ok)[0]:
        violations.append({"kind": "adjacency", "position": int(i)})

    # (b) uniqueness
    uniq, counts = np.unique(vox, return_counts=True)
    for v in uniq[counts > 1]:
        violations.append({"kind": "uniqueness", "voxel": int(v)})

    # (c) solidity
    occ = grid.occupancy.reshape(-1)
    for i in np.nonzero(~occ[vox])[0]:
        violations.append({"kind": "solidity", "position": int(i), "voxel": int(vox[i])})

    # (d) endpoints in base region
    for name, lin in (("first", vox[0]), ("last", vox[-1])):
        if not in_base_region(grid, lin, base_fraction):
            violations.append({"kind": "base_endpoint", "endpoint": name, "voxel": int(lin)})

    # (e) minimum wall thickness
    need = int(math.ceil(path.radius / grid.voxel_size)) + min_wall_voxels
    depth = interior_depth(grid.occupancy).reshape(-1)
    for i in np.nonzero(depth[vox] < need)[0]:
        violations.append(
            {
                "kind": "min_wall",
                "position": int(i),
                "voxel": int(vox[i]),
                "depth_voxels": int(depth[vox[i]]),
                "required_voxels": need,
            }
        )
    return violations


def keypoints_from_json(text):
    """Parse the keypoints file schema; returns (points, options dict)."""
    data = json.loads(text)
    if data.get("units", "mm") != "mm":
        raise RoutingError("keypoints file units must be mm")
    pts = np.asarray(data["keypoints"], dtype=np.float64)
    opts = {
        "radius_mm": float(data.get("channel_radius_mm", 1.0)),
        "interior_bias": float(data.get("interior_bias", 0.0)),
        "connectivity": int(data.get("connectivity", 26)),
        "clearance_voxels": data.get("clearance_voxels"),
    }
    if opts["clearance_voxels"] is not None:
        opts["clearance_voxels"] = int(opts["clearance_voxels"])
    return pts, opts
