"""Triangle meshes in millimetres: construction, welding, diagnostics."""

from dataclasses import dataclass, field

import numpy as np


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class TriangleMesh:
    """Immutable indexed triangle mesh. Units are always mm."""

    vertices: np.ndarray  # (n, 3) float64
    triangles: np.ndarray  # (m, 3) int64

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64))
        t = np.ascontiguousarray(np.asarray(self.triangles, dtype=np.int64))
        if v.ndim != 2 or v.shape[1] != 3:
            raise MeshError("vertices must be (n, 3)")
        if t.ndim != 2 or t.shape[1] != 3:
            raise MeshError("triangles must be (m, 3)")
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise MeshError("triangle index out of range")
        if t.size and (
            (t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])
        ).any():
            raise MeshError("degenerate triangle (repeated vertex index)")
        v.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)

    @property
    def bbox(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def triangle_coords(self):
        """(m, 3, 3) vertex coordinates per triangle."""
        return self.vertices[self.triangles]


def weld_vertices(vertices, triangles, tol=1e-6):
    """Merge vertices closer than tol and drop triangles that collapse."""
    vertices = np.asarray(vertices, dtype=np.float64)
    triangles = np.asarray(triangles, dtype=np.int64)
    if len(vertices) == 0:
        raise MeshError("empty mesh")
    key = np.round(vertices / tol).astype(np.int64)
    _, first, inverse = np.unique(key, axis=0, return_index=True, return_inverse=True)
    new_verts = vertices[first]
    new_tris = inverse[triangles]
    ok = (
        (new_tris[:, 0] != new_tris[:, 1])
        & (new_tris[:, 1] != new_tris[:, 2])
        & (new_tris[:, 0] != new_tris[:, 2])
    )
    return TriangleMesh(new_verts, new_tris[ok])


def _directed_edges(triangles):
    e = np.concatenate(
        [triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]], axis=0
    )
    return e


def is_watertight(mesh: TriangleMesh) -> bool:
    """Edge-manifold census: every directed edge unique, every undirected
    edge shared by exactly two triangles with opposite orientation."""
    if len(mesh.triangles) == 0:
        return False
    de = _directed_edges(mesh.triangles)
    # directed edges must be unique (consistent winding, no fins)
    view = de[:, 0] * (len(mesh.vertices) + 1) + de[:, 1]
    if len(np.unique(view)) != len(view):
        return False
    # each directed edge must have its reverse present
    rev = de[:, 1] * (len(mesh.vertices) + 1) + de[:, 0]
    return bool(np.isin(view, rev).all())


def signed_volume(mesh: TriangleMesh) -> float:
    """Volume (mm^3) by the signed-tetrahedra sum; positive for outward winding."""
    tc = mesh.triangle_coords()
    return float(np.einsum("ij,ij->", tc[:, 0], np.cross(tc[:, 1], tc[:, 2])) / 6.0)


def _component_count(mesh: TriangleMesh) -> int:
    n = len(mesh.vertices)
    parent = np.arange(n)

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    used = np.zeros(n, dtype=bool)
    for tri in mesh.triangles:
        used[tri] = True
        a, b, c = (int(i) for i in tri)
        ra, rb, rc = find(a), find(b), find(c)
        parent[rb] = ra
        parent[find(rc)] = ra
    roots = {find(int(i)) for i in np.nonzero(used)[0]}
    return len(roots)


def genus(mesh: TriangleMesh):
    """Genus from the Euler characteristic; None unless watertight."""
    if not is_watertight(mesh):
        return None
    de = _directed_edges(mesh.triangles)
    und = np.sort(de, axis=1)
    n_edges = len(np.unique(und[:, 0] * (len(mesh.vertices) + 1) + und[:, 1]))
    n_verts = len(np.unique(mesh.triangles))
    chi = n_verts - n_edges + len(mesh.triangles)
    c = _component_count(mesh)
    return (2 * c - chi) // 2


@dataclass
class MeshReport:
    watertight: bool
    volume_mm3: float
    triangles: int = 0
    bbox_min: list = field(default_factory=list)
    bbox_max: list = field(default_factory=list)
    genus: object = None

    def as_dict(self):
        return {
            "watertight": self.watertight,
            "volume_mm3": self.volume_mm3,
            "triangles": self.triangles,
            "bbox_min_mm": self.bbox_min,
            "bbox_max_mm": self.bbox_max,
            "genus": self.genus,
        }


def mesh_diagnostics(mesh: TriangleMesh) -> MeshReport:
    wt = is_watertight(mesh)
    lo, hi = mesh.bbox
    return MeshReport(
        watertight=wt,
        volume_mm3=abs(signed_volume(mesh)) if wt else 0.0,
        triangles=len(mesh.triangles),
        bbox_min=[float(x) for x in lo],
        bbox_max=[float(x) for x in hi],
        genus=genus(mesh) if wt else None,
    )
