/** Minimal binary STL reader: enough to hand three.js a triangle soup. */

export interface StlMesh {
  /** xyz per vertex, 9 floats per triangle */
  positions: Float32Array;
  triangleCount: number;
}

export function parseBinaryStl(buf: ArrayBuffer): StlMesh {
  if (buf.byteLength < 84) {
    throw new Error(`STL too short: ${buf.byteLength} bytes`);
  }
  const view = new DataView(buf);
  const n = view.getUint32(80, true);
  const expected = 84 + n * 50;
  if (buf.byteLength < expected) {
    throw new Error(
      `truncated STL: header promises ${n} triangles (${expected} bytes), got ${buf.byteLength}`
    );
  }
  const positions = new Float32Array(n * 9);
  for (let t = 0; t < n; t++) {
    const rec = 84 + t * 50;
    for (let k = 0; k < 9; k++) {
      // skip the 12-byte normal; vertices start at offset 12
      positions[t * 9 + k] = view.getFloat32(rec + 12 + k * 4, true);
    }
  }
  return { positions, triangleCount: n };
}

export function bbox(mesh: StlMesh): { min: number[]; max: number[] } {
  const min = [Infinity, Infinity, Infinity];
  const max = [-Infinity, -Infinity, -Infinity];
  const p = mesh.positions;
  for (let i = 0; i < p.length; i += 3) {
    for (let a = 0; a < 3; a++) {
      const v = p[i + a]!;
      if (v < min[a]!) min[a] = v;
      if (v > max[a]!) max[a] = v;
    }
  }
  return { min, max };
}
