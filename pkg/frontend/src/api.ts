import type {
  CarveResponse,
  CreateResponse,
  PathPayload,
  Report,
  RouteOptions,
  RouteResponse,
  Vec3,
  Violation,
  VoxelizeResponse,
} from "./types.js";

export type FetchLike = (
  url: string,
  init?: RequestInit
) => Promise<Response>;

/** Raised for any non-2xx response; carries the server's detail verbatim. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

async function fail(res: Response): Promise<never> {
  let detail = res.statusText;
  try {
    const body = await res.json();
    if (typeof body?.detail === "string") detail = body.detail;
    else if (body?.detail !== undefined) detail = JSON.stringify(body.detail);
  } catch {
    /* non-JSON error body: keep the status text */
  }
  throw new ApiError(res.status, detail);
}

/** Thin typed client over the channelforge HTTP API. All geometry comes
 * from the service; this class never transforms coordinates. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (u, i) => fetch(u, i)
  ) {}

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path, init);
    if (!res.ok) await fail(res);
    return (await res.json()) as T;
  }

  private post<T>(path: string, body?: unknown): Promise<T> {
    return this.json<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body ?? {}),
    });
  }

  createProject(stl: ArrayBuffer | Uint8Array): Promise<CreateResponse> {
    return this.json<CreateResponse>("/projects", {
      method: "POST",
      headers: { "content-type": "application/octet-stream" },
      body: stl as BodyInit,
    });
  }

  voxelize(
    id: string,
    voxelSizeMm?: number
  ): Promise<VoxelizeResponse> {
    const body = voxelSizeMm === undefined ? {} : { voxel_size_mm: voxelSizeMm };
    return this.post<VoxelizeResponse>(`/projects/${id}/voxelize`, body);
  }

  route(
    id: string,
    keypoints: Vec3[],
    options?: RouteOptions
  ): Promise<RouteResponse> {
    return this.post<RouteResponse>(`/projects/${id}/route`, {
      keypoints,
      options: options ?? {},
    });
  }

  carve(id: string): Promise<CarveResponse> {
    return this.post<CarveResponse>(`/projects/${id}/carve`);
  }

  getPath(id: string): Promise<{ path: PathPayload; violations: Violation[] }> {
    return this.json(`/projects/${id}/path`);
  }

  getReport(id: string): Promise<Report> {
    return this.json<Report>(`/projects/${id}/report`);
  }

  async getMesh(id: string, stage: "input" | "carved"): Promise<ArrayBuffer> {
    const res = await this.fetchImpl(
      `${this.baseUrl}/projects/${id}/mesh?stage=${stage}`
    );
    if (!res.ok) await fail(res);
    return res.arrayBuffer();
  }
}
