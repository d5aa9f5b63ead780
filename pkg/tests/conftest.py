import numpy as np
import pytest

from inpaint360.geometry.camera import Camera, look_at
from inpaint360.scene_synth.raytrace import render_ground_truth
from inpaint360.scene_synth.scene import CameraRigConfig, SceneSpec, generate_scene


@pytest.fixture(autouse=True)
def unittest_environment(monkeypatch):
    monkeypatch.setenv("INPAINT360_ENVIRONMENT", "unittest")
    monkeypatch.setenv("INPAINT360_TRACE_EXPORTER", "none")


@pytest.fixture
def identity_camera():
    return Camera(width=8, height=8, focal_x=4.0, focal_y=4.0, principal_x=4.0, principal_y=4.0, cam_to_world=np.eye(4))


@pytest.fixture
def front_camera():
    """32x32 camera three units out on -y, looking at the origin with +z up."""
    return Camera(
        width=32, height=32, focal_x=32.0, focal_y=32.0, principal_x=16.0, principal_y=16.0,
        cam_to_world=look_at((0.0, -3.0, 0.0), (0.0, 0.0, 0.0)),
    )


@pytest.fixture
def small_scene_spec():
    return SceneSpec(cameras=CameraRigConfig(num_views=8, width=32, height=32))


@pytest.fixture
def small_dataset(small_scene_spec):
    scene, cameras = generate_scene(small_scene_spec, seed=0)
    return render_ground_truth(scene, cameras)
