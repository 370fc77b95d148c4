import { describe, expect, it } from "vitest";
import { RouteScheduler } from "../src/routeQueue.js";
import type { RouteResponse, Vec3 } from "../src/types.js";

function deferred<T>() {
  let resolve!: (v: T) => void;
  let reject!: (e: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

const resp = (rev: number, kps: Vec3[]): RouteResponse => ({
  id: "p1",
  revision: rev,
  path: {
    polyline_mm: kps,
    voxel_indices: [],
    keypoint_marks: [],
    segment_costs: [],
    length_mm: 0,
    radius_mm: 1,
    connectivity: 26,
    clearance_voxels: 4,
  },
  violations: [],
});

describe("route scheduler", () => {
  it("sends a single request when idle", async () => {
    const calls: Vec3[][] = [];
    const sched = new RouteScheduler(async (kps) => {
      calls.push(kps);
      return resp(1, kps);
    });
    const out = await sched.submit([[0, 0, 0], [1, 0, 0]]);
    expect(out?.response.revision).toBe(1);
    expect(calls).toHaveLength(1);
    expect(sched.busy).toBe(false);
  });

  it("keeps only the latest submission while one is in flight", async () => {
    const gate = deferred<void>();
    const calls: Vec3[][] = [];
    let rev = 0;
    const sched = new RouteScheduler(async (kps) => {
      calls.push(kps);
      if (calls.length === 1) await gate.promise;
      return resp(++rev, kps);
    });

    const a = sched.submit([[0, 0, 0]]);
    const b = sched.submit([[1, 1, 1]]); // queued
    const c = sched.submit([[2, 2, 2]]); // replaces b
    expect(sched.busy).toBe(true);
    gate.resolve();

    const [ra, rb, rc] = await Promise.all([a, b, c]);
    expect(ra?.sent).toEqual([[0, 0, 0]]);
    expect(rb).toBeNull(); // superseded, never sent
    expect(rc?.sent).toEqual([[2, 2, 2]]);
    expect(calls).toEqual([[[0, 0, 0]], [[2, 2, 2]]]);
    expect(sched.busy).toBe(false);
  });

  it("a failed request rejects only its own submission", async () => {
    let n = 0;
    const sched = new RouteScheduler(async (kps) => {
      n += 1;
      if (n === 1) throw new Error("routing failed");
      return resp(n, kps);
    });
    await expect(sched.submit([[0, 0, 0]])).rejects.toThrow("routing failed");
    const ok = await sched.submit([[1, 1, 1]]);
    expect(ok?.response.revision).toBe(2);
  });

  it("stays serialised across many rapid submissions", async () => {
    let active = 0;
    let maxActive = 0;
    const sched = new RouteScheduler(async (kps) => {
      active += 1;
      maxActive = Math.max(maxActive, active);
      await new Promise((r) => setTimeout(r, 1));
      active -= 1;
      return resp(0, kps);
    });
    const jobs = Array.from({ length: 10 }, (_, i) =>
      sched.submit([[i, 0, 0]])
    );
    const outs = await Promise.all(jobs);
    expect(maxActive).toBe(1);
    // the last submission always wins
    expect(outs[9]?.sent).toEqual([[9, 0, 0]]);
  });
});
