import numpy as np
import pytest

from inpaint360.errors import NoIntersection
from inpaint360.field.grid import RadianceField
from inpaint360.field.render import (
    RaySampleBatch,
    backward,
    backward_samples,
    composite,
    intersect_aabb,
    render_view,
    sample_ray,
    sample_rays,
)
from inpaint360.geometry.camera import Camera, Ray, look_at


def _random_field(resolution=4, seed=0):
    rng = np.random.default_rng(seed)
    field = RadianceField(resolution, dtype=np.float64)
    field.density_param[...] = rng.normal(0.0, 1.0, field.density_param.shape)
    field.color_param[...] = rng.normal(0.0, 1.0, field.color_param.shape)
    return field


def _rays(count, seed=1):
    rng = np.random.default_rng(seed)
    origins = np.column_stack([np.full(count, -3.0), rng.uniform(-0.5, 0.5, count), rng.uniform(-0.5, 0.5, count)])
    targets = rng.uniform(-0.6, 0.6, size=(count, 3))
    directions = targets - origins
    return origins, directions / np.linalg.norm(directions, axis=1, keepdims=True)


def test_single_segment_matches_closed_form():
    batch = RaySampleBatch.from_arrays(t=[[1.0]], sigma=[[2.0]], rgb=[[[1.0, 0.5, 0.0]]], t_near=[0.5])
    result = composite(batch)
    expected = 1.0 - np.exp(-2.0 * 0.5)
    assert abs(result.accumulation[0] - expected) < 1e-9
    np.testing.assert_allclose(result.rgb[0], expected * np.array([1.0, 0.5, 0.0]), atol=1e-12)


def test_empty_space_renders_nothing():
    batch = RaySampleBatch.from_arrays(t=[[1.0, 2.0, 3.0]], sigma=[[0.0, 0.0, 0.0]], rgb=np.ones((1, 3, 3)), t_near=[0.0])
    result = composite(batch)
    assert result.accumulation[0] == 0.0
    assert result.depth[0] == 0.0
    np.testing.assert_array_equal(result.rgb[0], [0.0, 0.0, 0.0])


def test_opaque_first_sample_saturates():
    rgb = np.array([[[0.2, 0.4, 0.6], [1.0, 1.0, 1.0], [1.0, 0.0, 0.0]]])
    batch = RaySampleBatch.from_arrays(t=[[1.0, 2.0, 3.0]], sigma=[[100.0, 1.0, 1.0]], rgb=rgb, t_near=[0.5])
    result = composite(batch)
    np.testing.assert_allclose(result.rgb[0], rgb[0, 0], atol=1e-12)
    assert abs(result.depth[0] - 1.0) < 1e-12


def test_weights_sum_at_most_one():
    field = _random_field()
    origins, directions = _rays(64)
    result = composite(sample_rays(field, origins, directions, 32, np.random.default_rng(0)))
    assert np.all(result.weights.sum(axis=1) <= 1.0 + 1e-12)
    assert np.all(result.weights >= 0.0)


def test_samples_increase_inside_aabb():
    field = RadianceField(4)
    batch = sample_ray(field, Ray([-3.0, 0.0, 0.0], [1.0, 0.0, 0.0]), num_samples=2)
    t = batch.t[0]
    assert t[0] < t[1]
    assert 2.0 <= t[0] and t[1] <= 4.0


def test_ray_missing_aabb_raises():
    with pytest.raises(NoIntersection):
        sample_ray(RadianceField(4), Ray([-3.0, 5.0, 0.0], [1.0, 0.0, 0.0]))
    _, _, hit = intersect_aabb(np.array([[-3.0, 1.0, 1.0]]), np.array([[1.0, 0.0, 0.0]]), np.array([[-1.0] * 3, [1.0] * 3]))
    assert hit.shape == (1,)


def test_backward_matches_finite_differences():
    field = _random_field(seed=4)
    origins, directions = _rays(16, seed=5)
    rng = np.random.default_rng(6)
    c = rng.normal(size=(16, 3))
    a = rng.normal(size=16)
    b = rng.normal(size=16)

    def loss():
        result = composite(sample_rays(field, origins, directions, 16))
        return float(np.sum(result.rgb * c) + np.sum(result.depth * a) + np.sum(result.accumulation * b))

    batch = sample_rays(field, origins, directions, 16)
    composite(batch)
    backward_samples(batch, d_rgb=c, d_depth=a, d_accum=b).apply(field)

    h = 1e-5
    checked = 0
    for name, grad, count in (("density", field.density_grad, 60), ("color", field.color_grad, 100)):
        param = field.parameters()[name].reshape(-1)
        flat_grad = grad.reshape(-1)
        touched = np.flatnonzero(flat_grad)
        for index in rng.choice(touched, size=min(count, touched.size), replace=False):
            original = param[index]
            param[index] = original + h
            up = loss()
            param[index] = original - h
            down = loss()
            param[index] = original
            numeric = (up - down) / (2 * h)
            assert flat_grad[index] == pytest.approx(numeric, rel=1e-3, abs=1e-6)
            checked += 1
    assert checked >= 100


def test_zero_upstream_gradient_leaves_buffers():
    field = _random_field()
    origins, directions = _rays(8)
    batch = sample_rays(field, origins, directions, 8)
    composite(batch)
    backward_samples(batch).apply(field)
    assert not field.density_grad.any()
    assert not field.color_grad.any()


def test_occluded_samples_get_no_gradient():
    field = RadianceField(4, dtype=np.float64)
    field.density_param[...] = 1000.0
    batch = sample_rays(field, np.array([[-3.0, 0.0, 0.0]]), np.array([[1.0, 0.0, 0.0]]), 8)
    composite(batch)
    grads = backward_samples(batch, d_accum=np.ones(1))
    assert np.all(np.abs(grads.d_raw_density.reshape(1, 8)[0, 1:]) < 1e-30)


def test_opaque_wall_depth_within_voxel_diagonal(front_camera):
    field = RadianceField(33)
    nodes = field.node_positions()
    field.density_param[nodes[..., 1] >= 0.0] = 50.0
    view = render_view(field, front_camera, num_samples=512)
    center = view.depth[16, 16]
    assert abs(center - 3.0) <= field.voxel_diagonal
    assert view.accumulation[16, 16] > 0.99


def test_backward_accumulates_into_field_buffers():
    field = _random_field(seed=7)
    origins, directions = _rays(6, seed=8)
    batch = sample_rays(field, origins, directions, 8)
    composite(batch)
    upstream = np.ones((6, 3))
    backward(field, batch, d_rgb=upstream)
    once = field.color_grad.copy()
    backward(field, batch, d_rgb=upstream)
    assert once.any()
    np.testing.assert_allclose(field.color_grad, 2.0 * once)


def test_backward_requires_composited_batch():
    field = _random_field()
    origins, directions = _rays(2)
    with pytest.raises(RuntimeError):
        backward(field, sample_rays(field, origins, directions, 4), d_accum=np.ones(2))


def test_axis_parallel_miss_renders_empty_alongside_hits():
    field = _random_field(seed=9)
    origins = np.array([[-3.0, 5.0, 0.0], [-3.0, 0.0, 0.0], [0.0, 0.0, -7.0]])
    directions = np.array([[1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    t_near, t_far, hit = intersect_aabb(origins, directions, field.aabb)
    assert hit.tolist() == [False, True, True]
    assert np.isfinite(t_near).all() and np.isfinite(t_far).all()

    with np.errstate(invalid="raise"):
        batch = sample_rays(field, origins, directions, 8)
        result = composite(batch)
        backward(field, batch, d_rgb=np.ones((3, 3)), d_depth=np.ones(3), d_accum=np.ones(3))
    assert np.isfinite(batch.t).all()
    assert result.accumulation[0] == 0.0
    assert result.depth[0] == 0.0
    assert np.all(result.rgb[0] == 0.0)
    assert result.accumulation[1] > 0.0
    assert np.isfinite(field.density_grad).all()


def test_render_view_with_rays_missing_the_grid():
    cam = Camera(
        width=12, height=12, focal_x=4.0, focal_y=4.0, principal_x=6.0, principal_y=6.0,
        cam_to_world=look_at((0.0, 0.0, 3.0), (0.0, 0.0, 0.0)),
    )
    view = render_view(_random_field(seed=10), cam, num_samples=8)
    assert np.isfinite(view.rgb).all()
    assert (view.accumulation == 0.0).any()
    assert (view.accumulation > 0.0).any()
