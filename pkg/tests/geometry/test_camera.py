import numpy as np
import pytest

from inpaint360.errors import InvalidCamera
from inpaint360.geometry.camera import (
    Behind,
    Camera,
    PixelCoord,
    Projection,
    Ray,
    camera_rays,
    in_bounds,
    look_at,
    pixel_to_ray,
    point_from_depth,
    project,
    project_points,
    ray_depth_from_z,
    z_from_ray_depth,
)


def test_principal_point_looks_down_negative_z(identity_camera):
    ray = pixel_to_ray(identity_camera, PixelCoord(4.0, 4.0))
    np.testing.assert_allclose(ray.direction, [0.0, 0.0, -1.0])
    np.testing.assert_allclose(ray.origin, [0.0, 0.0, 0.0])


def test_one_focal_length_right_is_45_degrees(identity_camera):
    ray = pixel_to_ray(identity_camera, PixelCoord(8.0, 4.0))
    np.testing.assert_allclose(ray.direction, np.array([1.0, 0.0, -1.0]) / np.sqrt(2.0), atol=1e-12)


def test_point_from_depth_axis_aligned():
    ray = Ray(origin=[0.0, 0.0, 0.0], direction=[0.0, 0.0, -1.0])
    np.testing.assert_allclose(point_from_depth(ray, 2.5), [0.0, 0.0, -2.5])
    np.testing.assert_allclose(point_from_depth(ray, 0.0), ray.origin)


def test_project_backproject_round_trip(front_camera):
    rng = np.random.default_rng(3)
    for _ in range(20):
        pixel = PixelCoord(*rng.uniform(0.0, 32.0, size=2))
        ray = pixel_to_ray(front_camera, pixel)
        t = rng.uniform(0.5, 5.0)
        result = project(front_camera, point_from_depth(ray, t))
        assert isinstance(result, Projection)
        assert abs(result.pixel.u - pixel.u) < 1e-6
        assert abs(result.pixel.v - pixel.v) < 1e-6
        assert result.depth == pytest.approx(t * float(ray.direction @ front_camera.forward))


def test_point_behind_camera(identity_camera):
    assert isinstance(project(identity_camera, [0.0, 0.0, 1.0]), Behind)
    u, v, z = project_points(identity_camera, np.array([[0.0, 0.0, 1.0]]))
    assert np.isnan(u[0]) and np.isnan(v[0]) and z[0] < 0
    assert not in_bounds(identity_camera, u, v)[0]


def test_depth_conversions_are_inverse(front_camera):
    _, directions = camera_rays(front_camera)
    t = np.full(directions.shape[:-1], 2.0)
    z = z_from_ray_depth(front_camera, directions, t)
    assert np.all(z <= t + 1e-12)
    np.testing.assert_allclose(ray_depth_from_z(front_camera, directions, z), t)


def test_invalid_cameras_rejected():
    with pytest.raises(InvalidCamera):
        Camera(width=8, height=8, focal_x=-1.0, focal_y=4.0, principal_x=4.0, principal_y=4.0, cam_to_world=np.eye(4))
    with pytest.raises(InvalidCamera):
        Camera(width=8, height=8, focal_x=4.0, focal_y=4.0, principal_x=20.0, principal_y=4.0, cam_to_world=np.eye(4))
    skewed = np.eye(4)
    skewed[0, 1] = 0.1
    with pytest.raises(InvalidCamera):
        Camera(width=8, height=8, focal_x=4.0, focal_y=4.0, principal_x=4.0, principal_y=4.0, cam_to_world=skewed)


def test_look_at_points_forward_at_target():
    c2w = look_at((0.0, -3.0, 1.0), (0.0, 0.0, 0.0))
    cam = Camera(width=16, height=16, focal_x=16.0, focal_y=16.0, principal_x=8.0, principal_y=8.0, cam_to_world=c2w)
    expected = -np.array([0.0, -3.0, 1.0]) / np.linalg.norm([0.0, -3.0, 1.0])
    np.testing.assert_allclose(cam.forward, expected, atol=1e-12)
    result = project(cam, [0.0, 0.0, 0.0])
    assert result.pixel.u == pytest.approx(8.0)
    assert result.pixel.v == pytest.approx(8.0)
