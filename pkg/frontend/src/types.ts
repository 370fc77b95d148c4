/** Payload shapes of the channelforge HTTP API, mirrored verbatim. */

export type Vec3 = [number, number, number];

export interface MeshDiagnostics {
  watertight: boolean;
  genus: number;
  triangles: number;
  volume_mm3: number;
  bbox_min_mm: Vec3;
  bbox_max_mm: Vec3;
}

export interface CreateResponse {
  id: string;
  revision: number;
  diagnostics: MeshDiagnostics;
}

export interface VoxelizeResponse {
  id: string;
  revision: number;
  dims: Vec3;
  voxel_size_mm: number;
  solid_voxels: number;
}

export interface PathPayload {
  polyline_mm: Vec3[];
  voxel_indices: number[];
  keypoint_marks: number[];
  segment_costs: number[];
  length_mm: number;
  radius_mm: number;
  connectivity: number;
  clearance_voxels: number;
}

export interface Violation {
  kind: string;
  [extra: string]: unknown;
}

export interface RouteResponse {
  id: string;
  revision: number;
  path: PathPayload;
  violations: Violation[];
}

export interface CarveResponse {
  id: string;
  revision: number;
  channel_voxels: number;
  port_voxels: number;
  wall_warnings: Violation[];
}

export interface SliceSection {
  area_mm2: number;
  perimeter_mm: number;
  circularity: number;
  flagged: boolean;
}

export interface ReportSlice {
  z_mm: number;
  sections: SliceSection[];
}

export interface TangentSample {
  path_index: number;
  angle_deg: number;
  flagged: boolean;
}

export interface Report {
  overall: "pass" | "flagged";
  slices: ReportSlice[];
  tangents: TangentSample[];
  thresholds: { [name: string]: number };
}

export interface RouteOptions {
  radius_mm?: number;
  interior_bias?: number;
  connectivity?: number;
  clearance_voxels?: number;
  exact_marks?: boolean;
}
