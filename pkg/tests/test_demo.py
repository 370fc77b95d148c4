import numpy as np

from channelforge.demo import demo_coral_mesh, demo_keypoints
from channelforge.mesh import is_watertight, signed_volume


def test_demo_mesh_watertight(coral_mesh):
    assert is_watertight(coral_mesh)
    assert signed_volume(coral_mesh) > 0


def test_demo_mesh_deterministic(coral_mesh):
    again = demo_coral_mesh()
    assert np.array_equal(again.vertices, coral_mesh.vertices)
    assert np.array_equal(again.triangles, coral_mesh.triangles)


def test_demo_mesh_flat_base(coral_mesh):
    lo, hi = coral_mesh.bbox
    assert lo[2] >= -1e-9  # clipped at z=0
    # a substantial contact patch sits on the base plane
    on_base = np.isclose(coral_mesh.vertices[:, 2], lo[2], atol=1e-6).sum()
    assert on_base > 50


def test_demo_keypoints_shape():
    kps = np.asarray(demo_keypoints())
    assert kps.shape == (6, 3)
    # first and last near the base
    assert kps[0, 2] < 5.0 and kps[-1, 2] < 5.0
