"""Binary voxel grids and solid voxelisation of watertight meshes."""

import json
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import kernels
from .mesh import TriangleMesh, is_watertight

DEFAULT_MAX_DIM = 512
PAD_VOXELS = 2


class VoxelizeError(ValueError):
    pass


@dataclass(frozen=True)
class VoxelGrid:
    """Dense occupancy over a regular lattice; cell (i,j,k) center sits at
    origin + voxel_size * (i+0.5, j+0.5, k+0.5)."""

    occupancy: np.ndarray  # (nx, ny, nz) bool
    voxel_size: float
    origin: np.ndarray  # (3,) mm

    def __post_init__(self):
        occ = np.ascontiguousarray(np.asarray(self.occupancy, dtype=bool))
        org = np.asarray(self.origin, dtype=np.float64).reshape(3)
        if occ.ndim != 3 or min(occ.shape) < 1:
            raise VoxelizeError("occupancy must be a non-empty 3D array")
        if not self.voxel_size > 0:
            raise VoxelizeError("voxel_size must be positive")
        occ.setflags(write=False)
        org.setflags(write=False)
        object.__setattr__(self, "occupancy", occ)
        object.__setattr__(self, "origin", org)

    @property
    def dims(self):
        return self.occupancy.shape

    @property
    def solid_count(self) -> int:
        return int(self.occupancy.sum())

    def index_to_world(self, idx):
        idx = np.atleast_2d(np.asarray(idx, dtype=np.float64))
        return np.squeeze(self.origin + self.voxel_size * (idx + 0.5))

    def world_to_index(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        return np.squeeze(
            np.floor((pts - self.origin) / self.voxel_size).astype(np.int64)
        )

    def linear(self, ijk):
        ijk = np.atleast_2d(np.asarray(ijk, dtype=np.int64))
        nx, ny, nz = self.dims
        return np.squeeze((ijk[:, 0] * ny + ijk[:, 1]) * nz + ijk[:, 2])

    def unlinear(self, lin):
        lin = np.atleast_1d(np.asarray(lin, dtype=np.int64))
        nx, ny, nz = self.dims
        out = np.stack([lin // (ny * nz), (lin // nz) % ny, lin % nz], axis=-1)
        return np.squeeze(out)


def exterior_mask(occ: np.ndarray) -> np.ndarray:
    """Empty cells 6-connected to the grid boundary."""
    empty = ~occ
    labels, _ = ndimage.label(empty, structure=ndimage.generate_binary_structure(3, 1))
    boundary_labels = np.unique(
        np.concatenate(
            [
                labels[0].ravel(), labels[-1].ravel(),
                labels[:, 0].ravel(), labels[:, -1].ravel(),
                labels[:, :, 0].ravel(), labels[:, :, -1].ravel(),
            ]
        )
    )
    boundary_labels = boundary_labels[boundary_labels != 0]
    return np.isin(labels, boundary_labels)


def interior_depth(occ: np.ndarray) -> np.ndarray:
    """6-connected (taxicab) distance of each solid cell from the nearest
    empty cell, in voxels. Empty cells report 0."""
    return ndimage.distance_transform_cdt(occ, metric="taxicab").astype(np.int64)


def voxelize(
    mesh: TriangleMesh,
    voxel_size: float,
    max_dim: int = DEFAULT_MAX_DIM,
    like: "VoxelGrid | None" = None,
) -> VoxelGrid:
    """Solid voxelisation: rasterise the surface (triangle-box overlap),
    flood-fill the exterior from the grid boundary, and resolve the
    surface-crossed cells by which side of the nearest triangle their
    center lies on.

    Pass ``like`` to reuse another grid's origin/dims (round-trip checks).
    """
    if not voxel_size > 0:
        raise VoxelizeError("voxel_size must be positive")
    if not is_watertight(mesh):
        raise VoxelizeError("mesh is not watertight; cannot solid-voxelise")

    if like is not None:
        origin = like.origin.copy()
        nx, ny, nz = like.dims
    else:
        lo, hi = mesh.bbox
        extent = hi - lo
        dims = np.ceil(extent / voxel_size - 1e-9).astype(int) + 2 * PAD_VOXELS
        dims = np.maximum(dims, 1 + 2 * PAD_VOXELS)
        if dims.max() > max_dim:
            raise VoxelizeError(
                f"grid dims {tuple(dims)} exceed maximum {max_dim}; "
                f"use a voxel_size larger than {float(extent.max() / (max_dim - 2 * PAD_VOXELS)):.4g} mm"
            )
        origin = lo - PAD_VOXELS * voxel_size
        nx, ny, nz = (int(d) for d in dims)

    tri = np.ascontiguousarray(mesh.triangle_coords())
    barrier, inside = kernels.rasterize_mesh(
        tri, origin.astype(np.float64), float(voxel_size), nx, ny, nz
    )
    barrier = barrier.astype(bool)
    exterior = exterior_mask(barrier)
    solid = (~exterior) & (~barrier) | (barrier & inside.astype(bool))
    return VoxelGrid(solid, float(voxel_size), origin)


def default_voxel_size(mesh: TriangleMesh, target_span: int = 128) -> float:
    """Voxel size putting the longest bbox axis at target_span voxels."""
    lo, hi = mesh.bbox
    return float((hi - lo).max() / target_span)


def dump_grid(grid: VoxelGrid, raw_path, sidecar_path):
    """Raw occupancy bytes plus a JSON sidecar describing the lattice."""
    with open(raw_path, "wb") as f:
        f.write(np.packbits(grid.occupancy.astype(np.uint8)).tobytes())
    meta = {
        "dims": list(grid.dims),
        "voxel_size": grid.voxel_size,
        "origin": [float(x) for x in grid.origin],
    }
    with open(sidecar_path, "w") as f:
        json.dump(meta, f, sort_keys=True, indent=1)
        f.write("\n")


def load_grid(raw_path, sidecar_path) -> VoxelGrid:
    with open(sidecar_path) as f:
        meta = json.load(f)
    dims = tuple(meta["dims"])
    n = dims[0] * dims[1] * dims[2]
    with open(raw_path, "rb") as f:
        bits = np.unpackbits(np.frombuffer(f.read(), dtype=np.uint8), count=n)
    occ = bits.astype(bool).reshape(dims)
    return VoxelGrid(occ, float(meta["voxel_size"]), np.asarray(meta["origin"]))
