import type { PathPayload, Vec3, Violation } from "./types.js";

export interface ReportSummary {
  overall: "pass" | "flagged";
  flaggedSlices: number;
  flaggedTangents: number;
}

/** Editing state for one design session.
 *
 * Invariant: any keypoint edit sets `dirty`; `dirty` clears only when a
 * successful route response arrives for the exact keypoint list that is
 * still current. A route that raced a later edit leaves the session dirty.
 */
export interface SessionState {
  projectId: string;
  meshRevision: number;
  keypoints: Vec3[];
  lastPolyline: Vec3[] | null;
  lastViolations: Violation[];
  lastReport: ReportSummary | null;
  dirty: boolean;
}

export function createSession(
  projectId: string,
  meshRevision: number
): SessionState {
  return {
    projectId,
    meshRevision,
    keypoints: [],
    lastPolyline: null,
    lastViolations: [],
    lastReport: null,
    dirty: false,
  };
}

function withKeypoints(s: SessionState, keypoints: Vec3[]): SessionState {
  return { ...s, keypoints, dirty: true };
}

export function addKeypoint(s: SessionState, p: Vec3): SessionState {
  return withKeypoints(s, [...s.keypoints, [p[0], p[1], p[2]]]);
}

export function moveKeypoint(
  s: SessionState,
  index: number,
  p: Vec3
): SessionState {
  if (index < 0 || index >= s.keypoints.length) {
    throw new RangeError(`no keypoint at index ${index}`);
  }
  const kps = s.keypoints.map((kp, i): Vec3 =>
    i === index ? [p[0], p[1], p[2]] : kp
  );
  return withKeypoints(s, kps);
}

export function removeKeypoint(s: SessionState, index: number): SessionState {
  if (index < 0 || index >= s.keypoints.length) {
    throw new RangeError(`no keypoint at index ${index}`);
  }
  return withKeypoints(s, s.keypoints.filter((_, i) => i !== index));
}

export function sameKeypoints(a: Vec3[], b: Vec3[]): boolean {
  return (
    a.length === b.length &&
    a.every((p, i) => {
      const q = b[i]!;
      return p[0] === q[0] && p[1] === q[1] && p[2] === q[2];
    })
  );
}

/** Snapshot the keypoint list about to be sent to the service. */
export function snapshotKeypoints(s: SessionState): Vec3[] {
  return s.keypoints.map((p): Vec3 => [p[0], p[1], p[2]]);
}

/** Fold a successful route response into the session. The polyline is
 * stored exactly as received. Clears `dirty` only if `sentKeypoints` still
 * matches the current list. */
export function applyRouteResult(
  s: SessionState,
  sentKeypoints: Vec3[],
  path: PathPayload,
  violations: Violation[],
  meshRevision: number
): SessionState {
  return {
    ...s,
    meshRevision,
    lastPolyline: path.polyline_mm,
    lastViolations: violations,
    dirty: !sameKeypoints(sentKeypoints, s.keypoints),
  };
}

export function applyReport(
  s: SessionState,
  report: {
    overall: "pass" | "flagged";
    slices: { sections: { flagged: boolean }[] }[];
    tangents: { flagged: boolean }[];
  }
): SessionState {
  return {
    ...s,
    lastReport: {
      overall: report.overall,
      flaggedSlices: report.slices.filter((sl) =>
        sl.sections.some((sec) => sec.flagged)
      ).length,
      flaggedTangents: report.tangents.filter((t) => t.flagged).length,
    },
  };
}
