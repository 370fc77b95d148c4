import type { RouteOptions, RouteResponse, Vec3 } from "./types.js";

export type RouteFn = (
  keypoints: Vec3[],
  options?: RouteOptions
) => Promise<RouteResponse>;

export interface RouteOutcome {
  sent: Vec3[];
  response: RouteResponse;
}

/** Serialises route requests: at most one in flight, and while one is in
 * flight only the latest submitted state is kept (last-write-wins).
 * Superseded submissions resolve to null and are never sent. */
export class RouteScheduler {
  private inFlight = false;
  private pending: {
    keypoints: Vec3[];
    options?: RouteOptions;
    resolvers: ((o: RouteOutcome | null) => void)[];
    rejecters: ((e: unknown) => void)[];
  } | null = null;

  constructor(private readonly routeFn: RouteFn) {}

  get busy(): boolean {
    return this.inFlight;
  }

  submit(
    keypoints: Vec3[],
    options?: RouteOptions
  ): Promise<RouteOutcome | null> {
    return new Promise((resolve, reject) => {
      if (this.pending) {
        // drop the previously queued state: it was never sent
        for (const r of this.pending.resolvers) r(null);
        this.pending.resolvers = [];
        this.pending.rejecters = [];
      }
      this.pending = {
        keypoints,
        options,
        resolvers: [resolve],
        rejecters: [reject],
      };
      if (!this.inFlight) void this.drain();
    });
  }

  private async drain(): Promise<void> {
    this.inFlight = true;
    while (this.pending) {
      const job = this.pending;
      this.pending = null;
      try {
        const response = await this.routeFn(job.keypoints, job.options);
        for (const r of job.resolvers) {
          r({ sent: job.keypoints, response });
        }
      } catch (err) {
        for (const r of job.rejecters) r(err);
      }
    }
    this.inFlight = false;
  }
}
