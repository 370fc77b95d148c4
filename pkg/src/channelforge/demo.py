"""Bundled demo model: a procedurally generated branched 'coral' mesh and
the keypoints used by the end-to-end demo pipeline."""

import numpy as np
from skimage import measure

from .mesh import TriangleMesh, weld_vertices

# capsules as (start xyz, end xyz, radius), mm; base sits on z=0
_CAPSULES = [
    ((0.0, 0.0, -2.0), (0.0, 0.0, 6.0), 13.0),  # pedestal
    ((0.0, 0.0, 2.0), (0.0, 0.0, 24.0), 7.0),  # trunk
    ((0.0, 0.0, 20.0), (16.0, 6.0, 46.0), 5.0),  # branch A
    ((0.0, 0.0, 20.0), (-14.0, 9.0, 44.0), 5.0),  # branch B
    ((0.0, 0.0, 22.0), (2.0, -15.0, 50.0), 5.5),  # branch C
    ((8.0, 3.0, 33.0), (20.0, -2.0, 40.0), 4.0),  # twig off branch A
]


def _sdf(pts: np.ndarray) -> np.ndarray:
    d = np.full(len(pts), np.inf)
    for a, b, r in _CAPSULES:
        a = np.asarray(a)
        b = np.asarray(b)
        ab = b - a
        t = np.clip((pts - a) @ ab / (ab @ ab), 0.0, 1.0)
        closest = a + t[:, None] * ab
        d = np.minimum(d, np.linalg.norm(pts - closest, axis=1) - r)
    return d


def demo_coral_mesh(resolution_mm: float = 0.8) -> TriangleMesh:
    """Watertight branched demo mesh, deterministic by construction."""
    lo = np.array([-25.0, -25.0, -8.0])
    hi = np.array([28.0, 18.0, 58.0])
    dims = np.ceil((hi - lo) / resolution_mm).astype(int) + 1
    xs = lo[0] + resolution_mm * np.arange(dims[0])
    ys = lo[1] + resolution_mm * np.arange(dims[1])
    zs = lo[2] + resolution_mm * np.arange(dims[2])
    gx, gy, gz = np.meshgrid(xs, ys, zs, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
    field = _sdf(pts).reshape(dims)
    # clip below z=0 so the pedestal gets a flat printable bottom
    field = np.maximum(field, -gz)
    verts, faces, _, _ = measure.marching_cubes(field, level=0.0)
    verts = lo + verts * resolution_mm
    mesh = weld_vertices(verts, faces.astype(np.int64))
    return mesh


def demo_keypoints():
    """Ordered route keypoints: base inlet, three branch tips, base outlet."""
    return [
        [9.0, 2.0, 2.0],
        [14.0, 5.0, 42.0],
        [18.0, -1.0, 38.0],
        [-12.0, 8.0, 40.0],
        [1.5, -13.0, 46.0],
        [-8.0, -4.0, 2.0],
    ]
