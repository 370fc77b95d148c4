import * as THREE from "three";
import type { StlMesh } from "./stl.js";
import type { Vec3 } from "./types.js";

export function meshToGeometry(mesh: StlMesh): THREE.BufferGeometry {
  const geo = new THREE.BufferGeometry();
  geo.setAttribute("position", new THREE.BufferAttribute(mesh.positions, 3));
  geo.computeVertexNormals();
  return geo;
}

/** Cast a ray from normalised device coords through the camera; returns
 * the first hit on the mesh in world mm, or null on a miss (no-op). */
export function pickKeypoint(
  ndcX: number,
  ndcY: number,
  camera: THREE.Camera,
  target: THREE.Mesh
): Vec3 | null {
  const caster = new THREE.Raycaster();
  caster.setFromCamera(new THREE.Vector2(ndcX, ndcY), camera);
  const hits = caster.intersectObject(target, false);
  const hit = hits[0];
  if (!hit) return null;
  return [hit.point.x, hit.point.y, hit.point.z];
}

/** First and last keypoints must sit low on the model so injection ports
 * can reach the base; mirror the service's base-region fraction for the
 * UI hint only (the service re-validates). */
export function inBaseRegion(
  z: number,
  bboxMinZ: number,
  bboxMaxZ: number,
  baseFraction = 0.1
): boolean {
  return z <= bboxMinZ + baseFraction * (bboxMaxZ - bboxMinZ);
}
