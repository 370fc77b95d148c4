import * as THREE from "three";
import { ApiClient, ApiError } from "./api.js";
import {
  buildKeypointMarkers,
  buildPathOverlay,
  buildSliceOverlay,
  buildTangentOverlay,
} from "./overlay.js";
import { inBaseRegion, meshToGeometry, pickKeypoint } from "./picking.js";
import { RouteScheduler } from "./routeQueue.js";
import {
  SessionState,
  addKeypoint,
  applyReport,
  applyRouteResult,
  createSession,
  moveKeypoint,
  removeKeypoint,
  snapshotKeypoints,
} from "./session.js";
import { bbox, parseBinaryStl } from "./stl.js";
import type { Vec3 } from "./types.js";

const API_BASE = (window as any).CHANNELFORGE_API ?? "http://localhost:8008";

class DesignerApp {
  private readonly api = new ApiClient(API_BASE);
  private readonly scene = new THREE.Scene();
  private readonly camera = new THREE.PerspectiveCamera(45, 1, 0.1, 2000);
  private readonly renderer = new THREE.WebGLRenderer({ antialias: true });
  private readonly scheduler = new RouteScheduler((kps, opts) =>
    this.api.route(this.session!.projectId, kps, opts)
  );

  private session: SessionState | null = null;
  private targetMesh: THREE.Mesh | null = null;
  private meshBounds: { min: number[]; max: number[] } | null = null;
  private markers = new THREE.Group();
  private overlays = new THREE.Group();
  private dragging = -1;

  constructor(private readonly container: HTMLElement) {
    this.renderer.setSize(container.clientWidth, container.clientHeight);
    container.appendChild(this.renderer.domElement);
    this.camera.position.set(80, -80, 60);
    this.camera.up.set(0, 0, 1);
    this.camera.lookAt(0, 0, 20);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.4));
    const key = new THREE.DirectionalLight(0xffffff, 0.9);
    key.position.set(1, -1, 2);
    this.scene.add(key, this.markers, this.overlays);

    const canvas = this.renderer.domElement;
    canvas.addEventListener("pointerdown", (e) => this.onPointerDown(e));
    canvas.addEventListener("pointermove", (e) => this.onPointerMove(e));
    canvas.addEventListener("pointerup", () => (this.dragging = -1));
    const tick = () => {
      this.renderer.render(this.scene, this.camera);
      requestAnimationFrame(tick);
    };
    tick();
  }

  async loadStl(stl: ArrayBuffer): Promise<void> {
    const created = await this.api.createProject(stl);
    await this.api.voxelize(created.id);
    this.session = createSession(created.id, created.revision);

    const parsed = parseBinaryStl(stl);
    this.meshBounds = bbox(parsed);
    if (this.targetMesh) this.scene.remove(this.targetMesh);
    this.targetMesh = new THREE.Mesh(
      meshToGeometry(parsed),
      new THREE.MeshStandardMaterial({ color: 0xb0b8c0 })
    );
    this.scene.add(this.targetMesh);
    this.status(`project ${created.id} loaded`);
  }

  private ndc(e: PointerEvent): [number, number] {
    const r = this.renderer.domElement.getBoundingClientRect();
    return [
      ((e.clientX - r.left) / r.width) * 2 - 1,
      -((e.clientY - r.top) / r.height) * 2 + 1,
    ];
  }

  private onPointerDown(e: PointerEvent): void {
    if (!this.session || !this.targetMesh) return;
    const [x, y] = this.ndc(e);
    // grab an existing marker first: drag moves it
    const caster = new THREE.Raycaster();
    caster.setFromCamera(new THREE.Vector2(x, y), this.camera);
    const onMarker = caster.intersectObjects(this.markers.children, false)[0];
    if (onMarker) {
      this.dragging = this.markers.children.indexOf(onMarker.object);
      return;
    }
    const hit = pickKeypoint(x, y, this.camera, this.targetMesh);
    if (!hit) {
      this.status("missed the mesh");
      return;
    }
    this.session = addKeypoint(this.session, hit);
    this.refreshMarkers();
    this.hintBase(hit);
  }

  private onPointerMove(e: PointerEvent): void {
    if (this.dragging < 0 || !this.session || !this.targetMesh) return;
    const [x, y] = this.ndc(e);
    const hit = pickKeypoint(x, y, this.camera, this.targetMesh);
    if (!hit) return;
    this.session = moveKeypoint(this.session, this.dragging, hit);
    this.refreshMarkers();
  }

  deleteKeypoint(index: number): void {
    if (!this.session) return;
    this.session = removeKeypoint(this.session, index);
    this.refreshMarkers();
  }

  private hintBase(p: Vec3): void {
    if (!this.meshBounds) return;
    const kps = this.session!.keypoints;
    const isEndpoint = kps.length === 1 || kps.length >= 2;
    if (
      isEndpoint &&
      !inBaseRegion(p[2], this.meshBounds.min[2]!, this.meshBounds.max[2]!)
    ) {
      this.status("hint: first and last keypoints should sit in the base");
    }
  }

  async requestRoute(): Promise<void> {
    if (!this.session) return;
    if (this.session.keypoints.length < 2) {
      this.status("need at least 2 keypoints");
      return;
    }
    const sent = snapshotKeypoints(this.session);
    try {
      const outcome = await this.scheduler.submit(sent);
      if (!outcome || !this.session) return; // superseded
      this.session = applyRouteResult(
        this.session,
        outcome.sent,
        outcome.response.path,
        outcome.response.violations,
        outcome.response.revision
      );
      this.redrawOverlays(outcome.response.path);
      this.status(
        `routed: ${outcome.response.path.length_mm.toFixed(1)} mm, ` +
          `${outcome.response.violations.length} findings` +
          (this.session.dirty ? " (stale: keypoints changed)" : "")
      );
    } catch (err) {
      // 400/409 messages shown verbatim; anything else gets a retry banner
      if (err instanceof ApiError) this.status(err.detail);
      else this.status("network failure, retry", true);
    }
  }

  async carveAndCheck(): Promise<void> {
    if (!this.session) return;
    try {
      await this.api.carve(this.session.projectId);
      const report = await this.api.getReport(this.session.projectId);
      this.session = applyReport(this.session, report);
      const path = (await this.api.getPath(this.session.projectId)).path;
      this.redrawOverlays(path);
      if (this.meshBounds) {
        this.overlays.add(
          buildSliceOverlay(report, this.meshBounds.min, this.meshBounds.max),
          buildTangentOverlay(path, report)
        );
      }
      this.status(`printability: ${report.overall}`);
    } catch (err) {
      this.status(err instanceof ApiError ? err.detail : "network failure, retry", true);
    }
  }

  private redrawOverlays(path: Parameters<typeof buildPathOverlay>[0]): void {
    this.overlays.clear();
    this.overlays.add(buildPathOverlay(path).line);
  }

  private refreshMarkers(): void {
    this.markers.clear();
    this.markers.add(...buildKeypointMarkers(this.session!.keypoints).children);
  }

  private status(msg: string, sticky = false): void {
    const el = document.getElementById("status");
    if (el) {
      el.textContent = msg;
      el.classList.toggle("sticky", sticky);
    }
  }
}

function wireUi(): void {
  const container = document.getElementById("viewport");
  if (!container) return;
  const app = new DesignerApp(container);
  (window as any).designer = app;

  const fileInput = document.getElementById("stl-file") as HTMLInputElement | null;
  fileInput?.addEventListener("change", async () => {
    const f = fileInput.files?.[0];
    if (f) await app.loadStl(await f.arrayBuffer());
  });
  document
    .getElementById("route-btn")
    ?.addEventListener("click", () => void app.requestRoute());
  document
    .getElementById("check-btn")
    ?.addEventListener("click", () => void app.carveAndCheck());
}

if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", wireUi);
}

export { DesignerApp };
