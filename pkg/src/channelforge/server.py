"""HTTP/JSON design API backing the browser designer.

Projects live under a root directory, one subdirectory each. Mutations on
the same project serialize; a second mutation arriving while one is in
flight gets 409. Every response carries the project's monotonically
increasing revision (JSON field or X-Project-Revision header).
"""

import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .project import Project, ProjectError, StageError
from .router import RoutingError
from .carver import CarveError
from .stl_io import STLParseError
from .voxel import VoxelizeError


class VoxelizeBody(BaseModel):
    voxel_size_mm: float | None = Field(default=None, gt=0)


class RouteOptions(BaseModel):
    radius_mm: float = Field(default=1.0, gt=0)
    interior_bias: float = Field(default=0.0, ge=0)
    connectivity: int = 26
    clearance_voxels: int | None = Field(default=None, ge=0)
    exact_marks: bool = False


class RouteBody(BaseModel):
    keypoints: list[list[float]]
    options: RouteOptions = RouteOptions()


def create_app(root) -> FastAPI:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    app = FastAPI(title="channelforge", version="0.1.0")
    locks: dict[str, threading.Lock] = {}
    locks_guard = threading.Lock()

    def get_project(pid: str) -> Project:
        d = root / pid
        if not (d / "manifest.json").is_file():
            raise ProjectError(f"unknown project {pid!r}")
        return Project(d)

    def mutation_lock(pid: str) -> threading.Lock:
        with locks_guard:
            return locks.setdefault(pid, threading.Lock())

    @app.exception_handler(RequestValidationError)
    async def bad_schema(request, exc):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(ProjectError)
    async def project_error(request, exc):
        if isinstance(exc, StageError):
            return JSONResponse(status_code=409, content={"detail": str(exc)})
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    for err in (RoutingError, CarveError, STLParseError, VoxelizeError, ValueError):
        @app.exception_handler(err)
        async def domain_error(request, exc):
            return JSONResponse(status_code=400, content={"detail": str(exc)})

    def mutate(pid: str, fn):
        lock = mutation_lock(pid)
        if not lock.acquire(blocking=False):
            return JSONResponse(
                status_code=409,
                content={"detail": f"a mutation on project {pid!r} is in flight"},
            )
        try:
            return fn()
        finally:
            lock.release()

    @app.post("/projects", status_code=201)
    async def create_project(request: Request):
        data = await request.body()
        ctype = request.headers.get("content-type", "")
        if ctype.startswith("multipart/"):
            form = await request.form()
            upload = form.get("file")
            if upload is None:
                return JSONResponse(
                    status_code=400, content={"detail": "missing 'file' field"}
                )
            data = await upload.read()
        if not data:
            return JSONResponse(status_code=400, content={"detail": "empty STL body"})
        pid = uuid.uuid4().hex[:12]
        proj = Project.create(root / pid, data, project_id=pid)
        return {"id": proj.id, "revision": proj.revision,
                "diagnostics": proj.manifest["stages"]["mesh"]["diagnostics"]}

    @app.post("/projects/{pid}/voxelize")
    def voxelize(pid: str, body: VoxelizeBody):
        def run():
            proj = get_project(pid)
            grid = proj.voxelize(body.voxel_size_mm)
            return {
                "id": proj.id,
                "revision": proj.revision,
                "dims": list(grid.dims),
                "voxel_size_mm": grid.voxel_size,
                "solid_voxels": int(grid.solid_count),
            }
        return mutate(pid, run)

    @app.post("/projects/{pid}/route")
    def route(pid: str, body: RouteBody):
        if len(body.keypoints) < 2:
            return JSONResponse(
                status_code=400, content={"detail": "at least 2 keypoints"}
            )
        if any(len(p) != 3 for p in body.keypoints):
            return JSONResponse(
                status_code=400, content={"detail": "keypoints must be [x, y, z] mm"}
            )
        if body.options.connectivity not in (6, 26):
            return JSONResponse(
                status_code=400, content={"detail": "connectivity must be 6 or 26"}
            )

        def run():
            proj = get_project(pid)
            opts = body.options
            proj.route(
                body.keypoints, radius_mm=opts.radius_mm,
                interior_bias=opts.interior_bias, connectivity=opts.connectivity,
                clearance_voxels=opts.clearance_voxels, exact_marks=opts.exact_marks,
            )
            doc = proj.path_document()
            return {
                "id": proj.id,
                "revision": proj.revision,
                "path": doc["path"],
                "violations": doc["violations"],
            }
        return mutate(pid, run)

    @app.post("/projects/{pid}/carve")
    def carve(pid: str):
        def run():
            proj = get_project(pid)
            model = proj.carve()
            return {
                "id": proj.id,
                "revision": proj.revision,
                "channel_voxels": len(model.channel_voxels),
                "port_voxels": len(model.port_voxels),
                "wall_warnings": model.wall_warnings,
            }
        return mutate(pid, run)

    @app.get("/projects/{pid}/report")
    def report(pid: str):
        def run():
            proj = get_project(pid)
            if not proj.has_stage("report"):
                proj.check()  # lazily produced from the carved model
            return Response(
                content=proj.report_json(),
                media_type="application/json",
                headers={"X-Project-Revision": str(proj.revision)},
            )
        return mutate(pid, run)

    @app.get("/projects/{pid}/mesh")
    def mesh(pid: str, stage: str = "input"):
        if stage not in ("input", "carved"):
            return JSONResponse(
                status_code=400, content={"detail": "stage must be input or carved"}
            )
        proj = get_project(pid)
        data = proj.mesh_bytes(stage)
        return Response(
            content=data,
            media_type="model/stl",
            headers={"X-Project-Revision": str(proj.revision)},
        )

    @app.get("/projects/{pid}/path")
    def path(pid: str):
        proj = get_project(pid)
        doc = proj.path_document()
        return {
            "id": proj.id,
            "revision": proj.revision,
            "path": doc["path"],
            "violations": doc["violations"],
        }

    return app
