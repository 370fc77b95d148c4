import * as THREE from "three";
import type { PathPayload, Report, Vec3 } from "./types.js";

export interface PathOverlay {
  line: THREE.Line;
  /** vertices as drawn, copied straight from the API response */
  vertices: Vec3[];
}

/** Ghost polyline through the mesh. Vertices are taken verbatim from the
 * route response; no client-side smoothing or snapping. */
export function buildPathOverlay(path: PathPayload): PathOverlay {
  const vertices = path.polyline_mm;
  const flat = new Float32Array(vertices.length * 3);
  vertices.forEach((p, i) => flat.set(p, i * 3));
  const geo = new THREE.BufferGeometry();
  geo.setAttribute("position", new THREE.BufferAttribute(flat, 3));
  const mat = new THREE.LineBasicMaterial({
    color: 0x00c8ff,
    transparent: true,
    opacity: 0.85,
    depthTest: true,
  });
  return { line: new THREE.Line(geo, mat), vertices };
}

/** Flagged tangent samples drawn as red sub-segments of the path. Returns
 * one segment per flagged sample: [path_index - 1, path_index]. */
export function flaggedTangentSegments(
  path: PathPayload,
  report: Report
): [Vec3, Vec3][] {
  const out: [Vec3, Vec3][] = [];
  for (const t of report.tangents) {
    if (!t.flagged) continue;
    const a = path.polyline_mm[t.path_index - 1];
    const b = path.polyline_mm[t.path_index];
    if (a && b) out.push([a, b]);
  }
  return out;
}

export function buildTangentOverlay(
  path: PathPayload,
  report: Report
): THREE.LineSegments {
  const segs = flaggedTangentSegments(path, report);
  const flat = new Float32Array(segs.length * 6);
  segs.forEach(([a, b], i) => {
    flat.set(a, i * 6);
    flat.set(b, i * 6 + 3);
  });
  const geo = new THREE.BufferGeometry();
  geo.setAttribute("position", new THREE.BufferAttribute(flat, 3));
  return new THREE.LineSegments(
    geo,
    new THREE.LineBasicMaterial({ color: 0xff4040 })
  );
}

/** z heights of slices with at least one flagged cross-section. */
export function flaggedSliceHeights(report: Report): number[] {
  return report.slices
    .filter((s) => s.sections.some((sec) => sec.flagged))
    .map((s) => s.z_mm);
}

/** Translucent planes at each flagged z-slice, sized to the model bbox. */
export function buildSliceOverlay(
  report: Report,
  bboxMin: number[],
  bboxMax: number[]
): THREE.Group {
  const group = new THREE.Group();
  const w = bboxMax[0]! - bboxMin[0]!;
  const h = bboxMax[1]! - bboxMin[1]!;
  const mat = new THREE.MeshBasicMaterial({
    color: 0xffa020,
    transparent: true,
    opacity: 0.25,
    side: THREE.DoubleSide,
    depthWrite: false,
  });
  for (const z of flaggedSliceHeights(report)) {
    const plane = new THREE.Mesh(new THREE.PlaneGeometry(w, h), mat);
    plane.position.set(
      bboxMin[0]! + w / 2,
      bboxMin[1]! + h / 2,
      z
    );
    group.add(plane);
  }
  return group;
}

/** Numbered keypoint markers in list order. */
export function buildKeypointMarkers(
  keypoints: Vec3[],
  radiusMm = 1.2
): THREE.Group {
  const group = new THREE.Group();
  keypoints.forEach((p, i) => {
    const marker = new THREE.Mesh(
      new THREE.SphereGeometry(radiusMm, 12, 8),
      new THREE.MeshBasicMaterial({ color: i === 0 ? 0x40ff40 : 0xffff40 })
    );
    marker.position.set(p[0], p[1], p[2]);
    marker.name = `keypoint-${i}`;
    group.add(marker);
  });
  return group;
}
