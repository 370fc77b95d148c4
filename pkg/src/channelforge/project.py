"""Project directories: each design lives in a plain directory of artifact
files plus a manifest, with stage ordering mesh -> grid -> path -> carved ->
report enforced. Both the CLI and the HTTP service drive the pipeline through
this module, so their outputs are byte-identical."""

import json
import os
import uuid
from pathlib import Path

import numpy as np

from . import carver, router, stl_io, surface, voxel
from .mesh import mesh_diagnostics

MANIFEST = "manifest.json"

# artifact filenames, fixed so projects stay inspectable with plain tools
F_MESH = "input.stl"
F_GRID_RAW = "grid.raw"
F_GRID_META = "grid.json"
F_PATH = "path.json"
F_CARVED_RAW = "carved.raw"
F_CARVED_META = "carved.json"
F_CARVE = "carve.json"
F_REPORT = "report.json"
F_EXPORT = "model.stl"

STAGES = ("mesh", "grid", "path", "carved", "report")


class ProjectError(ValueError):
    pass


class StageError(ProjectError):
    """A stage was requested before its prerequisite artifact exists."""


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def data_root(override=None) -> Path:
    if override is not None:
        return Path(override)
    return Path(os.environ.get("CHANNELFORGE_DATA_DIR", "channelforge_projects"))


class Project:
    """One design: a directory of artifacts plus a manifest JSON."""

    def __init__(self, root: Path):
        self.root = Path(root)
        mf = self.root / MANIFEST
        if not mf.is_file():
            raise ProjectError(f"no project manifest at {mf}")
        self.manifest = json.loads(mf.read_text())

    # -- lifecycle ---------------------------------------------------------

    @classmethod
    def create(cls, root: Path, stl_bytes: bytes, units_scale: float = 1.0,
               project_id: str | None = None) -> "Project":
        mesh = stl_io.load_mesh(stl_bytes, units_scale=units_scale)
        pid = project_id or uuid.uuid4().hex[:12]
        root = Path(root)
        root.mkdir(parents=True, exist_ok=True)
        (root / F_MESH).write_bytes(stl_bytes)
        report = mesh_diagnostics(mesh).as_dict()
        manifest = {
            "id": pid,
            "revision": 1,
            "stages": {"mesh": {"units_scale": units_scale, "diagnostics": report}},
        }
        (root / MANIFEST).write_text(_dump_json(manifest))
        return cls(root)

    @property
    def id(self) -> str:
        return self.manifest["id"]

    @property
    def revision(self) -> int:
        return int(self.manifest["revision"])

    def has_stage(self, stage: str) -> bool:
        return stage in self.manifest["stages"]

    def _require(self, stage: str):
        if not self.has_stage(stage):
            raise StageError(f"stage '{stage}' has not been run yet")

    def _commit(self, stage: str, config: dict, drop=()):
        """Record a stage run, invalidate downstream artifacts, bump revision."""
        for s in drop:
            self.manifest["stages"].pop(s, None)
        self.manifest["stages"][stage] = config
        self.manifest["revision"] = self.revision + 1
        (self.root / MANIFEST).write_text(_dump_json(self.manifest))

    # -- artifact loads ----------------------------------------------------

    def load_mesh(self):
        self._require("mesh")
        scale = self.manifest["stages"]["mesh"]["units_scale"]
        return stl_io.load_mesh((self.root / F_MESH).read_bytes(), units_scale=scale)

    def load_grid(self) -> voxel.VoxelGrid:
        self._require("grid")
        return voxel.load_grid(self.root / F_GRID_RAW, self.root / F_GRID_META)

    def load_path(self) -> router.ChannelPath:
        self._require("path")
        d = json.loads((self.root / F_PATH).read_text())["path"]
        return router.ChannelPath(
            voxels=np.asarray(d["voxel_indices"], dtype=np.int64),
            keypoint_marks=list(d["keypoint_marks"]),
            radius=float(d["radius_mm"]),
            segment_costs=list(d["segment_costs"]),
            length=float(d["length_mm"]),
            connectivity=int(d["connectivity"]),
            clearance_voxels=int(d["clearance_voxels"]),
        )

    def load_carved(self) -> carver.CarvedModel:
        self._require("carved")
        grid = voxel.load_grid(self.root / F_CARVED_RAW, self.root / F_CARVED_META)
        meta = json.loads((self.root / F_CARVE).read_text())
        return carver.CarvedModel(
            grid=grid,
            channel_voxels=np.asarray(meta["channel_voxels"], dtype=np.int64),
            port_voxels=np.asarray(meta["port_voxels"], dtype=np.int64),
            inlet=int(meta["inlet"]),
            outlet=int(meta["outlet"]),
            path=self.load_path(),
            solid_before=int(meta["solid_before"]),
            ports_opened=bool(meta["ports_opened"]),
            wall_warnings=meta["wall_warnings"],
        )

    # -- pipeline stages ---------------------------------------------------

    def voxelize(self, voxel_size_mm: float | None = None, max_dim: int = 512):
        mesh = self.load_mesh()
        if voxel_size_mm is None:
            voxel_size_mm = voxel.default_voxel_size(mesh)
        grid = voxel.voxelize(mesh, voxel_size_mm, max_dim=max_dim)
        voxel.dump_grid(grid, self.root / F_GRID_RAW, self.root / F_GRID_META)
        self._commit(
            "grid",
            {
                "voxel_size_mm": float(voxel_size_mm),
                "dims": list(grid.dims),
                "solid_voxels": int(grid.solid_count),
            },
            drop=("path", "carved", "report"),
        )
        return grid

    def route(self, points, radius_mm=1.0, interior_bias=0.0, connectivity=26,
              clearance_voxels=None, exact_marks=False):
        grid = self.load_grid()
        kps = router.snap_keypoints(grid, points)
        path = router.route_channel(
            grid, kps, radius_mm=radius_mm, interior_bias=interior_bias,
            connectivity=connectivity, clearance_voxels=clearance_voxels,
            exact_marks=exact_marks,
        )
        violations = router.validate_path(path, grid)
        doc = {
            "keypoints_mm": [[float(c) for c in p] for p in np.atleast_2d(points)],
            "options": {
                "radius_mm": float(radius_mm),
                "interior_bias": float(interior_bias),
                "connectivity": int(connectivity),
                "clearance_voxels": (
                    None if clearance_voxels is None else int(clearance_voxels)
                ),
                "exact_marks": bool(exact_marks),
            },
            "path": path.as_dict(grid),
            "violations": violations,
        }
        (self.root / F_PATH).write_text(_dump_json(doc))
        self._commit(
            "path",
            {"keypoints": len(doc["keypoints_mm"]), "length_mm": path.length,
             "violations": len(violations)},
            drop=("carved", "report"),
        )
        return path, violations

    def path_document(self) -> dict:
        self._require("path")
        return json.loads((self.root / F_PATH).read_text())

    def carve(self):
        grid = self.load_grid()
        path = self.load_path()
        model = carver.carve(grid, path)
        model = carver.open_ports(model)
        voxel.dump_grid(model.grid, self.root / F_CARVED_RAW, self.root / F_CARVED_META)
        meta = {
            "channel_voxels": [int(v) for v in model.channel_voxels],
            "port_voxels": [int(v) for v in model.port_voxels],
            "inlet": int(model.inlet),
            "outlet": int(model.outlet),
            "solid_before": int(model.solid_before),
            "ports_opened": bool(model.ports_opened),
            "wall_warnings": model.wall_warnings,
        }
        (self.root / F_CARVE).write_text(_dump_json(meta))
        self._commit(
            "carved",
            {"channel_voxels": len(model.channel_voxels),
             "port_voxels": len(model.port_voxels)},
            drop=("report",),
        )
        return model

    def check(self, min_circularity=0.6, max_angle_deg=60.0):
        model = self.load_carved()
        report = carver.printability_check(
            model, min_circularity=min_circularity, max_angle_deg=max_angle_deg
        )
        (self.root / F_REPORT).write_text(report.to_json())
        self._commit(
            "report",
            {"min_circularity": float(min_circularity),
             "max_angle_deg": float(max_angle_deg),
             "overall": report.overall},
        )
        return report

    def report_json(self) -> str:
        self._require("report")
        return (self.root / F_REPORT).read_text()

    def export(self, smoothing_iters: int = 0) -> bytes:
        model = self.load_carved()
        data = carver.export_printable(model, smoothing_iters=smoothing_iters)
        (self.root / F_EXPORT).write_bytes(data)
        return data

    def mesh_bytes(self, stage: str = "input") -> bytes:
        if stage == "input":
            self._require("mesh")
            return (self.root / F_MESH).read_bytes()
        if stage == "carved":
            self._require("carved")
            out = self.root / F_EXPORT
            if not out.is_file():
                self.export()
            return out.read_bytes()
        raise ProjectError(f"unknown mesh stage {stage!r}")
