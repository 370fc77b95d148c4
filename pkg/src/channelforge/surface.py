"""Voxel grid back to mesh: marching cubes plus optional Taubin smoothing."""

import numpy as np
from skimage import measure

from .mesh import TriangleMesh, signed_volume
from .voxel import VoxelGrid


class SurfaceError(ValueError):
    pass


def _vertex_adjacency(n_verts, triangles):
    nbr = [[] for _ in range(n_verts)]
    for a, b, c in triangles:
        nbr[a].extend((b, c))
        nbr[b].extend((a, c))
        nbr[c].extend((a, b))
    return [np.unique(x) for x in nbr]


def _taubin_smooth(vertices, triangles, iterations, lam=0.5, mu=-0.53):
    # shrink-compensated Laplacian smoothing; keeps volume drift small
    v = vertices.copy()
    nbr = _vertex_adjacency(len(v), triangles)
    for _ in range(iterations):
        for factor in (lam, mu):
            avg = np.empty_like(v)
            for i, ns in enumerate(nbr):
                avg[i] = v[ns].mean(axis=0) if len(ns) else v[i]
            v = v + factor * (avg - v)
    return v


def extract_surface(grid: VoxelGrid, smoothing_iters: int = 3) -> TriangleMesh:
    """Watertight mesh of the occupancy field via marching cubes (iso 0.5).

    smoothing_iters=0 gives the raw (dimensionally exact) surface; exports
    that need accuracy should use 0.
    """
    if grid.solid_count == 0:
        raise SurfaceError("grid has no solid voxels")
    field = np.pad(grid.occupancy.astype(np.float32), 1)
    verts, faces, _, _ = measure.marching_cubes(field, level=0.5)
    # field index (i) maps to cell (i-1), whose center is origin + (i-0.5)*h
    verts = grid.origin + (verts - 0.5) * grid.voxel_size
    faces = faces.astype(np.int64)
    if smoothing_iters > 0:
        verts = _taubin_smooth(verts, faces, smoothing_iters)
    mesh = TriangleMesh(verts, faces)
    if signed_volume(mesh) < 0:
        mesh = TriangleMesh(verts, faces[:, ::-1])
    return mesh
