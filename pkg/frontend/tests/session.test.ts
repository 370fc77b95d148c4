import { describe, expect, it } from "vitest";
import {
  addKeypoint,
  applyReport,
  applyRouteResult,
  createSession,
  moveKeypoint,
  removeKeypoint,
  sameKeypoints,
  snapshotKeypoints,
} from "../src/session.js";
import type { PathPayload, Vec3 } from "../src/types.js";

const path = (polyline: Vec3[]): PathPayload => ({
  polyline_mm: polyline,
  voxel_indices: [0, 1],
  keypoint_marks: [0, 1],
  segment_costs: [1],
  length_mm: 1,
  radius_mm: 1,
  connectivity: 26,
  clearance_voxels: 4,
});

describe("session dirty flag", () => {
  it("starts clean with no keypoints", () => {
    const s = createSession("p1", 1);
    expect(s.dirty).toBe(false);
    expect(s.keypoints).toEqual([]);
  });

  it("add, move and remove each set dirty", () => {
    let s = createSession("p1", 1);
    s = addKeypoint(s, [1, 2, 3]);
    expect(s.dirty).toBe(true);
    s = { ...s, dirty: false };
    s = moveKeypoint(s, 0, [4, 5, 6]);
    expect(s.dirty).toBe(true);
    expect(s.keypoints[0]).toEqual([4, 5, 6]);
    s = { ...s, dirty: false };
    s = removeKeypoint(s, 0);
    expect(s.dirty).toBe(true);
    expect(s.keypoints).toEqual([]);
  });

  it("route response for the current list clears dirty", () => {
    let s = createSession("p1", 1);
    s = addKeypoint(s, [0, 0, 0]);
    s = addKeypoint(s, [9, 0, 0]);
    const sent = snapshotKeypoints(s);
    s = applyRouteResult(s, sent, path([[0, 0, 0], [9, 0, 0]]), [], 3);
    expect(s.dirty).toBe(false);
    expect(s.meshRevision).toBe(3);
  });

  it("route response for a stale list leaves dirty set", () => {
    let s = createSession("p1", 1);
    s = addKeypoint(s, [0, 0, 0]);
    s = addKeypoint(s, [9, 0, 0]);
    const sent = snapshotKeypoints(s);
    s = moveKeypoint(s, 1, [9, 9, 0]); // user edits while request in flight
    s = applyRouteResult(s, sent, path([[0, 0, 0], [9, 0, 0]]), [], 3);
    expect(s.dirty).toBe(true);
  });

  it("stores the polyline exactly as received", () => {
    let s = createSession("p1", 1);
    s = addKeypoint(s, [0, 0, 0]);
    s = addKeypoint(s, [9, 0, 0]);
    const poly: Vec3[] = [
      [0.123456789, 0, 0],
      [4.987654321, 0.5, 0],
      [9, 0, 0],
    ];
    s = applyRouteResult(s, snapshotKeypoints(s), path(poly), [], 2);
    expect(s.lastPolyline).toEqual(poly);
  });

  it("out-of-range edits throw", () => {
    const s = createSession("p1", 1);
    expect(() => moveKeypoint(s, 0, [0, 0, 0])).toThrow(RangeError);
    expect(() => removeKeypoint(s, 2)).toThrow(RangeError);
  });

  it("sameKeypoints compares by value and order", () => {
    expect(sameKeypoints([[1, 2, 3]], [[1, 2, 3]])).toBe(true);
    expect(sameKeypoints([[1, 2, 3]], [[1, 2, 4]])).toBe(false);
    expect(
      sameKeypoints(
        [[1, 2, 3], [4, 5, 6]],
        [[4, 5, 6], [1, 2, 3]]
      )
    ).toBe(false);
  });

  it("applyReport summarises flags", () => {
    let s = createSession("p1", 1);
    s = applyReport(s, {
      overall: "flagged",
      slices: [
        { sections: [{ flagged: false }] },
        { sections: [{ flagged: false }, { flagged: true }] },
      ],
      tangents: [{ flagged: true }, { flagged: false }, { flagged: true }],
    });
    expect(s.lastReport).toEqual({
      overall: "flagged",
      flaggedSlices: 1,
      flaggedTangents: 2,
    });
  });
});
