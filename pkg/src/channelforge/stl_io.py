"""STL reading (binary and ASCII) and binary writing."""

import io
import struct

import numpy as np

from .mesh import MeshError, TriangleMesh, weld_vertices

HEADER_TEXT = b"channelforge"
WELD_TOL = 1e-6


class STLParseError(ValueError):
    def __init__(self, message, byte_offset=None):
        if byte_offset is not None:
            message = f"{message} (at byte {byte_offset})"
        super().__init__(message)
        self.byte_offset = byte_offset


def _is_ascii(data: bytes) -> bool:
    if not data.lstrip().startswith(b"solid"):
        return False
    # a binary file may still start with "solid"; trust the size formula
    if len(data) >= 84:
        (count,) = struct.unpack_from("<I", data, 80)
        if len(data) == 84 + 50 * count:
            return False
    return b"facet" in data[:2048] or b"endsolid" in data


def _load_ascii(data: bytes) -> TriangleMesh:
    verts = []
    offset = 0
    for line in data.split(b"\n"):
        stripped = line.strip()
        if stripped.startswith(b"vertex"):
            parts = stripped.split()
            if len(parts) != 4:
                raise STLParseError("malformed vertex line", offset)
            try:
                verts.append([float(p) for p in parts[1:]])
            except ValueError:
                raise STLParseError("non-numeric vertex", offset)
        offset += len(line) + 1
    if not verts:
        raise STLParseError("no vertices found in ASCII STL")
    if len(verts) % 3 != 0:
        raise STLParseError(f"vertex count {len(verts)} not a multiple of 3")
    v = np.asarray(verts, dtype=np.float64)
    t = np.arange(len(v), dtype=np.int64).reshape(-1, 3)
    return weld_vertices(v, t, tol=WELD_TOL)


def _load_binary(data: bytes) -> TriangleMesh:
    if len(data) < 84:
        raise STLParseError("binary STL shorter than 84-byte preamble", len(data))
    (count,) = struct.unpack_from("<I", data, 80)
    expected = 84 + 50 * count
    if len(data) < expected:
        raise STLParseError(
            f"facet count {count} implies {expected} bytes, file has {len(data)}",
            len(data),
        )
    rec = np.frombuffer(data, dtype=np.dtype("(4,3)<f4, <u2"), count=count, offset=84)
    tris = rec["f0"][:, 1:, :].astype(np.float64)  # drop normals
    if count == 0:
        raise STLParseError("empty mesh (0 facets)")
    v = tris.reshape(-1, 3)
    t = np.arange(len(v), dtype=np.int64).reshape(-1, 3)
    return weld_vertices(v, t, tol=WELD_TOL)


def load_mesh(data, units_scale: float = 1.0) -> TriangleMesh:
    """Parse an STL stream (bytes or file-like) into a welded TriangleMesh."""
    if hasattr(data, "read"):
        data = data.read()
    if not isinstance(data, (bytes, bytearray)):
        raise STLParseError("expected bytes or a binary stream")
    data = bytes(data)
    if len(data) == 0:
        raise STLParseError("empty file", 0)
    mesh = _load_ascii(data) if _is_ascii(data) else _load_binary(data)
    if len(mesh.triangles) == 0:
        raise MeshError("mesh has no valid triangles")
    if units_scale != 1.0:
        mesh = TriangleMesh(mesh.vertices * units_scale, mesh.triangles)
    return mesh


def save_stl(mesh: TriangleMesh) -> bytes:
    """Binary STL bytes; facet normals recomputed from triangle winding."""
    tc = mesh.triangle_coords()
    n = np.cross(tc[:, 1] - tc[:, 0], tc[:, 2] - tc[:, 0])
    norm = np.linalg.norm(n, axis=1, keepdims=True)
    norm[norm == 0] = 1.0
    n = n / norm
    buf = io.BytesIO()
    header = HEADER_TEXT + b" " * (80 - len(HEADER_TEXT))
    buf.write(header)
    buf.write(struct.pack("<I", len(tc)))
    rec = np.zeros(len(tc), dtype=np.dtype("(4,3)<f4, <u2"))
    rec["f0"][:, 0, :] = n.astype(np.float32)
    rec["f0"][:, 1:, :] = tc.astype(np.float32)
    buf.write(rec.tobytes())
    return buf.getvalue()
