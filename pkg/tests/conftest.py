import numpy as np
import pytest

from channelforge.demo import demo_coral_mesh
from channelforge.mesh import TriangleMesh
from channelforge.voxel import default_voxel_size, voxelize


def make_cube_mesh(side=10.0, origin=(0.0, 0.0, 0.0)):
    """Axis-aligned cube as 12 triangles with outward winding."""
    o = np.asarray(origin, dtype=np.float64)
    s = float(side)
    v = o + s * np.array(
        [
            [0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0],
            [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1],
        ],
        dtype=np.float64,
    )
    t = np.array(
        [
            [0, 2, 1], [0, 3, 2],  # bottom (z=0, normal -z)
            [4, 5, 6], [4, 6, 7],  # top
            [0, 1, 5], [0, 5, 4],  # y=0
            [2, 3, 7], [2, 7, 6],  # y=1
            [1, 2, 6], [1, 6, 5],  # x=1
            [3, 0, 4], [3, 4, 7],  # x=0
        ],
        dtype=np.int64,
    )
    return TriangleMesh(vertices=v, triangles=t)


@pytest.fixture(scope="session")
def cube_mesh():
    return make_cube_mesh()


@pytest.fixture(scope="session")
def coral_mesh():
    return demo_coral_mesh()


@pytest.fixture(scope="session")
def coral_grid(coral_mesh):
    """Demo mesh at the standard 128-voxel resolution."""
    return voxelize(coral_mesh, default_voxel_size(coral_mesh))
