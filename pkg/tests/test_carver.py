import json

import numpy as np
import pytest

from channelforge.carver import (
    CarveError,
    PortError,
    carve,
    channel_mask,
    export_printable,
    open_ports,
    printability_check,
)
from channelforge.mesh import is_watertight
from channelforge.router import ChannelPath
from channelforge.stl_io import load_mesh
from channelforge.voxel import VoxelGrid
from oracles import flood_reachable


def padded_block(dims=(16, 16, 16), h=1.0):
    occ = np.zeros(tuple(d + 4 for d in dims), dtype=bool)
    occ[2:-2, 2:-2, 2:-2] = True
    return VoxelGrid(occ, h, np.zeros(3))


def make_path(grid, ijk_list, radius=1.0):
    vox = np.array([grid.linear(np.array(p)) for p in ijk_list])
    diffs = np.diff(np.asarray(ijk_list, dtype=float), axis=0)
    length = float(np.linalg.norm(diffs, axis=1).sum() * grid.voxel_size)
    return ChannelPath(
        voxels=vox, keypoint_marks=[0, len(vox) - 1], radius=radius,
        segment_costs=[1.0], length=length,
    )


def vertical_path(grid, x=8, y=8, z0=2, z1=13, radius=1.0):
    return make_path(grid, [[x, y, z] for z in range(z0, z1 + 1)], radius)


# -- carve ---------------------------------------------------------------------


def test_carve_accounting_exact():
    grid = padded_block()
    path = vertical_path(grid)
    model = carve(grid, path)
    delta = model.solid_before - model.grid.solid_count
    assert delta == len(model.channel_voxels)
    assert model.port_voxels.size == 0
    assert not model.ports_opened


def test_carve_straight_tube_volume():
    grid = padded_block((20, 20, 30))
    path = vertical_path(grid, x=11, y=11, z0=4, z1=27, radius=2.0)
    model = carve(grid, path)
    L = (27 - 4) * grid.voxel_size
    expect = np.pi * 2.0**2 * L
    got = len(model.channel_voxels) * grid.voxel_size**3
    assert abs(got - expect) / expect < 0.15


def test_carve_voxels_within_radius():
    grid = padded_block()
    path = vertical_path(grid, radius=1.5)
    model = carve(grid, path)
    centers = grid.unlinear(model.channel_voxels) + 0.5
    poly = grid.unlinear(path.voxels) + 0.5
    for c in centers:
        d = np.linalg.norm(poly - c, axis=1).min()
        # distance to the polyline is bounded by radius (segment metric is
        # tighter than vertex metric by at most half a step)
        assert d <= 1.5 / grid.voxel_size + 0.5 + 1e-9


def test_carve_rejects_disconnection():
    # a thin plate fully severed by the channel
    occ = np.zeros((20, 9, 9), dtype=bool)
    occ[2:18, 3:6, 2:7] = True
    grid = VoxelGrid(occ, 1.0, np.zeros(3))
    path = make_path(grid, [[9, 4, z] for z in range(2, 7)], radius=2.5)
    with pytest.raises(CarveError):
        carve(grid, path)


def test_carve_thin_wall_warnings():
    grid = padded_block((8, 8, 12))
    # hug the x face: wall thinner than the minimum
    path = make_path(grid, [[3, 5, z] for z in range(2, 12)], radius=1.0)
    model = carve(grid, path)
    assert len(model.wall_warnings) > 0


# -- ports ----------------------------------------------------------------------


def test_ports_three_voxels_above_base():
    grid = padded_block()
    path = make_path(grid, [[5, 8, 5]] + [[x, 8, 5] for x in range(6, 13)] + [[13, 8, 5]], radius=1.0)
    model = open_ports(carve(grid, path))
    assert model.ports_opened
    assert len(model.port_voxels) > 0
    # port shafts drop 3 cells from path z=5 to base z=2
    pk = grid.unlinear(model.port_voxels)
    assert pk[:, 2].min() == 2
    # exterior exposure: exactly the two shaft columns reach the base layer
    base_cols = {(i, j) for i, j, k in pk if k == 2}
    assert len(base_cols) >= 2


def test_ports_endpoint_already_on_base():
    grid = padded_block()
    path = vertical_path(grid, z0=2, z1=13)
    model = open_ports(carve(grid, path))
    assert model.ports_opened
    # inlet sits on the base layer; no shaft voxels needed below it


def test_ports_error_over_cavity():
    grid = padded_block((16, 16, 16))
    occ = grid.occupancy.copy()
    occ[8, 8, 4] = False  # sealed cavity under the endpoint column
    grid = VoxelGrid(occ, 1.0, np.zeros(3))
    path = make_path(grid, [[8, 8, z] for z in range(6, 13)], radius=1.0)
    with pytest.raises(PortError):
        open_ports(carve(grid, path))


def test_inlet_outlet_flood_reachable():
    grid = padded_block()
    path = make_path(
        grid,
        [[4, 8, 2], [4, 8, 3]] + [[x, 8, 4] for x in range(4, 13)] + [[13, 8, 3], [13, 8, 2]],
        radius=1.0,
    )
    model = open_ports(carve(grid, path))
    void = channel_mask(model)
    inlet = grid.unlinear(model.inlet)
    outlet = grid.unlinear(model.outlet)
    assert flood_reachable(void, inlet, outlet)


def test_carve_total_accounting_with_ports():
    grid = padded_block()
    path = make_path(grid, [[5, 8, 5]] + [[x, 8, 5] for x in range(6, 13)] + [[13, 8, 5]], radius=1.0)
    model = open_ports(carve(grid, path))
    delta = model.solid_before - model.grid.solid_count
    assert delta == len(model.channel_voxels) + len(model.port_voxels)


# -- printability -----------------------------------------------------------------


def test_vertical_channel_passes():
    grid = padded_block((16, 16, 20))
    path = vertical_path(grid, z0=2, z1=17, radius=1.5)
    model = open_ports(carve(grid, path))
    report = printability_check(model)
    assert report.overall == "pass"


def test_horizontal_run_flagged():
    grid = padded_block((20, 16, 16))
    path = make_path(
        grid,
        [[4, 8, 2], [4, 8, 3], [4, 8, 4]]
        + [[x, 8, 4] for x in range(5, 16)]
        + [[16, 8, 3], [16, 8, 2]],
        radius=1.0,
    )
    model = open_ports(carve(grid, path))
    report = printability_check(model, max_angle_deg=60.0)
    flagged = [t for t in report.tangents if t["flagged"]]
    assert report.overall == "flagged"
    assert any(t["angle_deg"] == pytest.approx(90.0) for t in flagged)


def test_report_json_stable():
    grid = padded_block((16, 16, 20))
    path = vertical_path(grid, z0=2, z1=17)
    model = open_ports(carve(grid, path))
    report = printability_check(model)
    text = report.to_json()
    assert json.loads(text)["overall"] == "pass"
    assert text == printability_check(model).to_json()


# -- export ------------------------------------------------------------------------


def test_export_watertight_with_ports():
    grid = padded_block((16, 16, 20))
    path = vertical_path(grid, x=9, y=9, z0=2, z1=17, radius=1.5)
    model = open_ports(carve(grid, path))
    mesh = load_mesh(export_printable(model))
    assert is_watertight(mesh)
