import numpy as np
import pytest

from channelforge.voxel import (
    VoxelGrid,
    VoxelizeError,
    default_voxel_size,
    dump_grid,
    exterior_mask,
    interior_depth,
    load_grid,
    voxelize,
)
from conftest import make_cube_mesh
from oracles import parity_inside


def test_cube_exact_voxel_count(cube_mesh):
    grid = voxelize(cube_mesh, 1.0)
    assert grid.solid_count == 1000


@pytest.mark.parametrize("offset", [(0.3, 0.2, 0.1), (0.5, 0.5, 0.5), (0.25, 0.75, 0.33)])
def test_cube_count_insensitive_to_alignment(offset):
    grid = voxelize(make_cube_mesh(10.0, offset), 1.0)
    assert grid.solid_count == 1000


def test_padding_at_least_two_voxels(cube_mesh):
    grid = voxelize(cube_mesh, 1.0)
    lo, hi = cube_mesh.bbox
    assert np.all(grid.origin <= lo - 2 * grid.voxel_size + 1e-9)
    # no solid voxel in the outermost two layers
    occ = grid.occupancy
    assert not occ[:2].any() and not occ[-2:].any()
    assert not occ[:, :2].any() and not occ[:, -2:].any()
    assert not occ[:, :, :2].any() and not occ[:, :, -2:].any()


def test_sphere_volume_within_tolerance():
    from skimage import measure as skm

    from channelforge.mesh import weld_vertices

    n = 64
    xs = np.linspace(-15, 15, n)
    gx, gy, gz = np.meshgrid(xs, xs, xs, indexing="ij")
    f = np.sqrt(gx**2 + gy**2 + gz**2) - 10.0
    v, fa, _, _ = skm.marching_cubes(f, 0.0, spacing=(xs[1] - xs[0],) * 3)
    sphere = weld_vertices(v - 15.0, fa.astype(np.int64))
    grid = voxelize(sphere, 1.0)
    expect = 4.0 / 3.0 * np.pi * 1000.0
    assert abs(grid.solid_count - expect) / expect < 0.05


def test_parity_oracle_agreement(coral_mesh):
    """Voxel classification agrees with an independent ray-parity test."""
    mesh = coral_mesh
    grid = voxelize(mesh, 1.5)
    idx = np.argwhere(np.ones(grid.dims, dtype=bool))
    rng = np.random.default_rng(42)
    sel = rng.choice(len(idx), 3000, replace=False)
    centers = grid.origin + grid.voxel_size * (idx[sel] + 0.5)
    inside = parity_inside(mesh, centers)
    occ = grid.occupancy.reshape(-1)[grid.linear(idx[sel])]
    assert (inside == occ).mean() >= 0.995


def test_non_watertight_rejected(cube_mesh):
    from channelforge.mesh import TriangleMesh

    open_mesh = TriangleMesh(
        vertices=cube_mesh.vertices.copy(),
        triangles=cube_mesh.triangles[:-1].copy(),
    )
    with pytest.raises(VoxelizeError):
        voxelize(open_mesh, 1.0)


def test_max_dim_guard(cube_mesh):
    with pytest.raises(VoxelizeError, match="voxel_size larger"):
        voxelize(cube_mesh, 0.01, max_dim=64)


def test_default_voxel_size(coral_mesh):
    h = default_voxel_size(coral_mesh)
    lo, hi = coral_mesh.bbox
    assert (hi - lo).max() / h == pytest.approx(128.0)


def test_exterior_mask_excludes_internal_cavity():
    occ = np.zeros((9, 9, 9), dtype=bool)
    occ[2:7, 2:7, 2:7] = True
    occ[4, 4, 4] = False  # sealed cavity
    ext = exterior_mask(occ)
    assert not ext[4, 4, 4]
    assert ext[0, 0, 0]


def test_interior_depth_taxicab():
    occ = np.zeros((7, 7, 7), dtype=bool)
    occ[1:6, 1:6, 1:6] = True
    depth = interior_depth(occ)
    assert depth[3, 3, 3] == 3  # taxicab distance to nearest empty
    assert depth[1, 3, 3] == 1
    assert depth[0, 0, 0] == 0


def test_grid_linear_unlinear_round_trip():
    occ = np.zeros((4, 5, 6), dtype=bool)
    grid = VoxelGrid(occ, 1.0, np.zeros(3))
    idx = np.array([[0, 0, 0], [3, 4, 5], [1, 2, 3]])
    assert np.array_equal(grid.unlinear(grid.linear(idx)), idx)


def test_world_index_round_trip(cube_mesh):
    grid = voxelize(cube_mesh, 1.0)
    ijk = np.array([5, 6, 7])
    w = grid.index_to_world(ijk)
    assert np.array_equal(grid.world_to_index(w), ijk)


def test_dump_load_round_trip(tmp_path, cube_mesh):
    grid = voxelize(cube_mesh, 1.0)
    dump_grid(grid, tmp_path / "g.raw", tmp_path / "g.json")
    grid2 = load_grid(tmp_path / "g.raw", tmp_path / "g.json")
    assert np.array_equal(grid.occupancy, grid2.occupancy)
    assert grid2.voxel_size == grid.voxel_size
    assert np.array_equal(grid2.origin, grid.origin)


def test_voxelize_like_reuses_lattice(cube_mesh):
    grid = voxelize(cube_mesh, 1.0)
    grid2 = voxelize(cube_mesh, 1.0, like=grid)
    assert grid2.dims == grid.dims
    assert np.array_equal(grid2.origin, grid.origin)
    assert np.array_equal(grid2.occupancy, grid.occupancy)
