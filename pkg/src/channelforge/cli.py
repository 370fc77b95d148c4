"""Command-line pipeline driver.

Exit codes: 0 success, 2 validation failure (bad input, missing stage,
routing/carving errors), 1 unexpected error.
"""

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import graspsim, router, sigproc
from .demo import demo_coral_mesh, demo_keypoints
from .project import Project, ProjectError, StageError, data_root
from .sensemodel import ChannelElectrical, MeasurementChain
from .stl_io import save_stl

UNIT_SCALE = {"mm": 1.0, "cm": 10.0, "m": 1000.0}

# violation kinds that make a routed path unusable; min_wall is advisory
HARD_VIOLATIONS = ("adjacency", "uniqueness", "solidity", "base_endpoint")


def _hard(violations):
    return [v for v in violations if v["kind"] in HARD_VIOLATIONS]


def _fail(msg: str, code: int = 2):
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


def _open_project(out) -> Project:
    try:
        return Project(Path(out))
    except ProjectError as e:
        _fail(str(e))


def _guard(fn, *args, **kwargs):
    """Run a pipeline step, mapping domain errors to exit 2."""
    try:
        return fn(*args, **kwargs)
    except (ProjectError, ValueError) as e:
        _fail(str(e))


@click.group()
def main():
    """Route, carve and validate liquid-metal channels in printable models."""


@main.command()
@click.argument("stl", type=click.Path(exists=True, dir_okay=False))
@click.option("--voxel-size-mm", type=float, default=None,
              help="Voxel edge length; default spans the longest axis with 128 voxels.")
@click.option("--units", type=click.Choice(["mm", "cm", "m"]), default="mm",
              help="Units of the input STL.")
@click.option("--out", default=None, help="Project directory.")
def voxelize(stl, voxel_size_mm, units, out):
    """Load an STL and build the solid voxel grid."""
    root = Path(out) if out else data_root() / Path(stl).stem
    data = Path(stl).read_bytes()
    proj = _guard(Project.create, root, data, units_scale=UNIT_SCALE[units])
    grid = _guard(proj.voxelize, voxel_size_mm)
    click.echo(
        f"voxelized: dims {grid.dims}, voxel {grid.voxel_size:.4g} mm, "
        f"{grid.solid_count} solid voxels -> {root}"
    )


@main.command()
@click.option("--keypoints", "keypoints_file", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON file: {\"keypoints\": [[x,y,z],...], ...options}.")
@click.option("--radius-mm", type=float, default=None)
@click.option("--interior-bias", type=float, default=None)
@click.option("--connectivity", type=click.Choice(["6", "26"]), default=None)
@click.option("--clearance", type=int, default=None)
@click.option("--exact-marks", is_flag=True, default=False)
@click.option("--out", required=True, help="Project directory (from voxelize).")
def route(keypoints_file, radius_mm, interior_bias, connectivity, clearance, exact_marks, out):
    """Route the channel through ordered keypoints."""
    proj = _open_project(out)
    pts, opts = _guard(router.keypoints_from_json, Path(keypoints_file).read_text())
    # CLI flags override the keypoints-file options
    if radius_mm is not None:
        opts["radius_mm"] = radius_mm
    if interior_bias is not None:
        opts["interior_bias"] = interior_bias
    if connectivity is not None:
        opts["connectivity"] = int(connectivity)
    if clearance is not None:
        opts["clearance_voxels"] = clearance
    path, violations = _guard(proj.route, pts, exact_marks=exact_marks, **opts)
    click.echo(
        f"routed: {len(path.voxels)} voxels, {path.length:.2f} mm, "
        f"{len(violations)} violations -> {Path(out) / 'path.json'}"
    )
    if _hard(violations):
        sys.exit(2)


@main.command()
@click.option("--out", required=True, help="Project directory (from route).")
def carve(out):
    """Carve the channel tube and open the two base ports."""
    proj = _open_project(out)
    model = _guard(proj.carve)
    click.echo(
        f"carved: {len(model.channel_voxels)} channel voxels, "
        f"{len(model.port_voxels)} port voxels, "
        f"{len(model.wall_warnings)} wall warnings"
    )


@main.command()
@click.option("--min-circularity", type=float, default=0.6)
@click.option("--max-angle-deg", type=float, default=60.0)
@click.option("--out", required=True, help="Project directory (from carve).")
def check(min_circularity, max_angle_deg, out):
    """Printability report on the carved model."""
    proj = _open_project(out)
    report = _guard(proj.check, min_circularity, max_angle_deg)
    click.echo(f"printability: {report.overall} -> {Path(out) / 'report.json'}")
    if report.overall != "pass":
        sys.exit(2)


@main.command()
@click.option("--smoothing-iters", type=int, default=0)
@click.option("--out", required=True, help="Project directory (from carve).")
def export(smoothing_iters, out):
    """Export the carved model as a binary STL."""
    proj = _open_project(out)
    data = _guard(proj.export, smoothing_iters)
    click.echo(f"exported {len(data)} bytes -> {Path(out) / 'model.stl'}")


@main.command()
@click.option("--in", "infile", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Trace CSV.")
@click.option("--method", type=click.Choice(["linear", "highpass", "both"]),
              default="both")
@click.option("--period", type=float, default=6.0, help="Cycle period (s).")
@click.option("--out", default=".", help="Output directory.")
def analyze(infile, method, period, out):
    """Drift-correct a resistance trace and emit per-cycle statistics."""
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    trace = _guard(sigproc.ingest_csv, Path(infile).read_bytes())
    corrected = _guard(sigproc.remove_drift, trace, method=method, period=period)
    windows = _guard(sigproc.segment_cycles, corrected, period)
    stats = _guard(sigproc.cycle_stats, windows)
    (outdir / "corrected.csv").write_text(corrected.to_csv())
    (outdir / "stats.json").write_text(sigproc.stats_json(stats))
    (outdir / "plot_data.csv").write_text(
        sigproc.plot_data_csv(stats, corrected.sample_rate)
    )
    click.echo(
        f"{stats.cycle_count} cycles, mean peak {stats.mean_peak:.4g} Ohm "
        f"(sd {stats.sd_peak:.3g}) -> {outdir}"
    )


def _demo_electrical() -> ChannelElectrical:
    # straight 100 mm reference channel calibrated to the 0.5 Ohm baseline
    length = 100.0
    area = float(np.pi)  # r = 1 mm
    rho = 0.5 * area / length
    return ChannelElectrical(
        resistivity=rho, step_lengths=np.full(100, 1.0), area=area
    )


@main.command()
@click.option("--episodes", "n", type=int, default=15)
@click.option("--seed", type=int, default=0)
@click.option("--target-resistance", type=float, default=0.125)
@click.option("--out", default=".", help="Output directory.")
def simulate(n, seed, target_resistance, out):
    """Run seeded grasp episodes on the bundled plant."""
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    elec = _demo_electrical()
    plant = graspsim.demo_grasp_plant(elec)
    cfg = graspsim.ControllerConfig(target_resistance=target_resistance)
    chain = MeasurementChain(noise_rms=graspsim.CALIBRATED_NOISE_RMS)
    episodes, stats = _guard(graspsim.batch_run, plant, cfg, chain, n, seed=seed)
    for i, ep in enumerate(episodes):
        (outdir / f"episode_{i:03d}.csv").write_text(ep.to_csv())
    (outdir / "summary.json").write_text(graspsim.batch_summary_json(episodes, stats))
    reached = sum(1 for e in episodes if e.outcome == "target_reached")
    click.echo(
        f"{reached}/{n} target_reached, median max reading "
        f"{stats.median:.4g} Ohm -> {outdir}"
    )


@main.command()
@click.option("--voxel-size-mm", type=float, default=None)
@click.option("--radius-mm", type=float, default=1.0)
@click.option("--interior-bias", type=float, default=4.0)
@click.option("--seed", type=int, default=0)
@click.option("--out", default=None, help="Project directory.")
def demo(voxel_size_mm, radius_mm, interior_bias, seed, out):
    """End-to-end pipeline on the bundled coral mesh."""
    root = Path(out) if out else data_root() / "demo"
    mesh = demo_coral_mesh()
    proj = _guard(Project.create, root, save_stl(mesh), project_id="demo")
    grid = _guard(proj.voxelize, voxel_size_mm)
    click.echo(f"voxelized: dims {grid.dims}, {grid.solid_count} solid voxels")
    path, violations = _guard(
        proj.route, demo_keypoints(), radius_mm=radius_mm,
        interior_bias=interior_bias,
    )
    click.echo(f"routed: {path.length:.2f} mm, {len(violations)} violations")
    model = _guard(proj.carve)
    click.echo(f"carved: {len(model.channel_voxels)} channel voxels, ports open")
    report = _guard(proj.check)
    click.echo(f"printability: {report.overall}")
    data = _guard(proj.export)
    click.echo(f"exported {len(data)} bytes -> {root / 'model.stl'}")
    if _hard(violations):
        sys.exit(2)


@main.command()
@click.option("--port", type=int, default=8000)
@click.option("--host", default="127.0.0.1")
@click.option("--out", default=None, help="Project root directory.")
def serve(port, host, out):
    """Serve the HTTP/JSON design API."""
    import uvicorn

    from .server import create_app

    app = create_app(data_root(out))
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
