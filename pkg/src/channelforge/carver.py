"""Carve the routed channel out of the solid, open injection ports at the
base, and score the result for printability."""

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from skimage import measure

from . import kernels
from .router import ChannelPath, validate_path
from .surface import extract_surface
from .stl_io import save_stl
from .voxel import VoxelGrid, exterior_mask

DEFAULT_MIN_CIRCULARITY = 0.6
DEFAULT_MAX_ANGLE_DEG = 60.0


class CarveError(ValueError):
    pass


class PortError(CarveError):
    pass


@dataclass
class CarvedModel:
    grid: VoxelGrid  # solid minus channel (and ports, once opened)
    channel_voxels: np.ndarray  # linear indices carved for the tube
    port_voxels: np.ndarray  # linear indices carved for the two shafts
    inlet: int
    outlet: int
    path: ChannelPath
    solid_before: int
    ports_opened: bool = False
    wall_warnings: list = field(default_factory=list)

    @property
    def void_voxels(self) -> np.ndarray:
        return np.concatenate([self.channel_voxels, self.port_voxels])


def _component_count(occ: np.ndarray) -> int:
    _, n = ndimage.label(occ, structure=ndimage.generate_binary_structure(3, 3))
    return n


def carve(grid: VoxelGrid, path: ChannelPath, min_wall_voxels: int = 2) -> CarvedModel:
    """Empty every solid voxel whose center lies within path.radius of the
    centerline polyline. Fails if the remaining solid falls apart."""
    hard = [
        v
        for v in validate_path(path, grid)
        if v["kind"] in ("adjacency", "uniqueness", "solidity")
    ]
    if hard:
        raise CarveError(f"path invalid against grid: {hard[:3]}")

    h = grid.voxel_size
    poly_vox = np.atleast_2d(grid.unlinear(path.voxels)).astype(np.float64)
    radius_vox = path.radius / h
    carved_mask = kernels.carve_tube(
        np.ascontiguousarray(grid.occupancy), np.ascontiguousarray(poly_vox), radius_vox
    ).astype(bool)
    carved_mask &= grid.occupancy
    new_occ = grid.occupancy & ~carved_mask

    before = _component_count(grid.occupancy)
    after = _component_count(new_occ)
    if after > before:
        raise CarveError(
            f"carving split the solid into {after} components (was {before})"
        )

    if carved_mask.any():
        channel = np.sort(np.atleast_1d(grid.linear(np.argwhere(carved_mask))))
    else:
        channel = np.empty(0, dtype=np.int64)

    # wall check: channel voxels sitting right next to the old exterior
    warnings = []
    ext = exterior_mask(grid.occupancy)
    near_ext = ndimage.binary_dilation(
        ext, structure=ndimage.generate_binary_structure(3, 3), iterations=min_wall_voxels
    )
    thin = carved_mask & near_ext
    for ijk in np.argwhere(thin):
        warnings.append({"kind": "thin_wall", "index": [int(x) for x in ijk]})

    return CarvedModel(
        grid=VoxelGrid(new_occ, h, grid.origin),
        channel_voxels=channel.astype(np.int64),
        port_voxels=np.empty(0, dtype=np.int64),
        inlet=int(path.voxels[0]),
        outlet=int(path.voxels[-1]),
        path=path,
        solid_before=int(grid.occupancy.sum()),
        wall_warnings=warnings,
    )


def open_ports(model: CarvedModel) -> CarvedModel:
    """Carve two vertical shafts of channel radius straight down from the
    path endpoints to the base plane, exposing the channel for injection."""
    grid = model.grid
    occ = grid.occupancy
    nx, ny, nz = grid.dims
    void = np.zeros_like(occ)
    vi = np.atleast_2d(grid.unlinear(model.void_voxels)) if len(model.void_voxels) else np.empty((0, 3), int)
    for i, j, k in vi:
        void[i, j, k] = True

    ks = np.nonzero((occ | void).any(axis=(0, 1)))[0]
    if len(ks) == 0:
        raise PortError("model is empty")
    k_base = int(ks[0])

    h = grid.voxel_size
    r_vox = model.path.radius / h
    new_occ = occ.copy()
    port_cells = []
    for name, lin in (("inlet", model.inlet), ("outlet", model.outlet)):
        ci, cj, ck = (int(x) for x in grid.unlinear(int(lin)))
        # centerline column must stay inside material (or channel) down to base
        for k in range(k_base, ck):
            if not (occ[ci, cj, k] or void[ci, cj, k]):
                raise PortError(
                    f"{name} shaft at ({ci},{cj}) crosses empty space at z-index {k} "
                    "before reaching the base plane"
                )
        r_int = int(math.floor(r_vox))
        for di in range(-r_int, r_int + 1):
            for dj in range(-r_int, r_int + 1):
                if di * di + dj * dj > r_vox * r_vox:
                    continue
                i, j = ci + di, cj + dj
                if not (0 <= i < nx and 0 <= j < ny):
                    continue
                for k in range(k_base, ck + 1):
                    if new_occ[i, j, k]:
                        new_occ[i, j, k] = False
                        port_cells.append((i, j, k))

    if port_cells:
        port_lin = np.sort(grid.linear(np.asarray(port_cells, dtype=np.int64)))
        port_lin = np.atleast_1d(port_lin)
    else:
        port_lin = np.empty(0, dtype=np.int64)
    return CarvedModel(
        grid=VoxelGrid(new_occ, h, grid.origin),
        channel_voxels=model.channel_voxels,
        port_voxels=np.unique(np.concatenate([model.port_voxels, port_lin])).astype(np.int64),
        inlet=model.inlet,
        outlet=model.outlet,
        path=model.path,
        solid_before=model.solid_before,
        ports_opened=True,
        wall_warnings=model.wall_warnings,
    )


def channel_mask(model: CarvedModel) -> np.ndarray:
    mask = np.zeros(model.grid.dims, dtype=bool)
    if len(model.void_voxels):
        ijk = np.atleast_2d(model.grid.unlinear(model.void_voxels))
        mask[ijk[:, 0], ijk[:, 1], ijk[:, 2]] = True
    return mask


@dataclass
class PrintabilityReport:
    overall: str  # "pass" | "flagged"
    slices: list
    tangents: list
    thresholds: dict

    def as_dict(self):
        return {
            "overall": self.overall,
            "slices": self.slices,
            "tangents": self.tangents,
            "thresholds": self.thresholds,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=1) + "\n"


def printability_check(
    model: CarvedModel,
    min_circularity: float = DEFAULT_MIN_CIRCULARITY,
    max_angle_deg: float = DEFAULT_MAX_ANGLE_DEG,
) -> PrintabilityReport:
    """Per z-slice channel cross-section circularity plus path tangent
    angles from the build (+z) axis."""
    h = model.grid.voxel_size
    mask = channel_mask(model)
    slices = []
    flagged_sections = 0
    for k in range(model.grid.dims[2]):
        sl = mask[:, :, k]
        if not sl.any():
            continue
        labels, n = ndimage.label(sl)
        sections = []
        for lab in range(1, n + 1):
            region = labels == lab
            area = float(region.sum()) * h * h
            perim = float(measure.perimeter(region, neighborhood=4)) * h
            if perim <= 0:
                circ = 1.0
            else:
                circ = min(1.0, 4.0 * math.pi * area / (perim * perim))
            flagged = bool(circ < min_circularity)
            flagged_sections += flagged
            sections.append(
                {
                    "area_mm2": area,
                    "perimeter_mm": perim,
                    "circularity": circ,
                    "flagged": flagged,
                }
            )
        z_mm = float(model.grid.origin[2] + h * (k + 0.5))
        slices.append({"z_mm": z_mm, "sections": sections})

    poly = model.path.polyline(model.grid)
    tangents = []
    flagged_tangents = 0
    for i in range(2, len(poly) - 2):
        t = poly[i + 2] - poly[i - 2]
        norm = float(np.linalg.norm(t))
        if norm == 0:
            continue
        angle = math.degrees(math.acos(min(1.0, abs(float(t[2])) / norm)))
        flagged = bool(angle > max_angle_deg)
        flagged_tangents += flagged
        tangents.append({"path_index": i, "angle_deg": angle, "flagged": flagged})

    overall = "pass" if (flagged_sections == 0 and flagged_tangents == 0) else "flagged"
    return PrintabilityReport(
        overall=overall,
        slices=slices,
        tangents=tangents,
        thresholds={
            "min_circularity": min_circularity,
            "max_angle_deg": max_angle_deg,
        },
    )


def export_printable(model: CarvedModel, smoothing_iters: int = 0) -> bytes:
    """Binary STL of solid-minus-channel. Smoothing off by default to keep
    dimensional accuracy."""
    mesh = extract_surface(model.grid, smoothing_iters=smoothing_iters)
    return save_stl(mesh)
