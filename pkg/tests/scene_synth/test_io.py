import numpy as np
import pytest
from PIL import Image

from inpaint360.documents import read_json
from inpaint360.errors import ConfigError, MissingInput
from inpaint360.scene_synth.io import (
    DEPTH_SCALE,
    depth_scale_for,
    load_dataset,
    load_depth,
    load_empty_scene,
    load_mask,
    save_dataset,
    save_depth,
)
from inpaint360.scene_synth.raytrace import render_ground_truth
from inpaint360.scene_synth.scene import CameraRigConfig, SceneSpec, generate_scene


def test_dataset_round_trip(tmp_path, small_dataset):
    save_dataset(small_dataset, tmp_path / "synth")
    loaded = load_dataset(tmp_path / "synth")
    assert loaded.view_indices == small_dataset.view_indices
    assert loaded.scene.to_document() == small_dataset.scene.to_document()
    for index, view in small_dataset.views.items():
        other = loaded.views[index]
        np.testing.assert_array_equal(other.rgb, view.rgb)
        np.testing.assert_array_equal(other.ids, view.ids)
        finite = np.isfinite(view.depth)
        np.testing.assert_array_equal(np.isfinite(other.depth), finite)
        assert np.max(np.abs(other.depth[finite] - view.depth[finite])) <= 0.5e-4 + 1e-12


def test_depth_overflow_rejected(tmp_path):
    with pytest.raises(ConfigError):
        save_depth(tmp_path / "d.png", tmp_path / "v.png", np.full((2, 2), 100.0))


def test_depth_background_sentinel(tmp_path):
    depth = np.array([[1.0, np.inf], [2.5, 0.25]])
    save_depth(tmp_path / "d.png", tmp_path / "v.png", depth)
    loaded = load_depth(tmp_path / "d.png", tmp_path / "v.png")
    assert np.isinf(loaded[0, 1])
    np.testing.assert_allclose(loaded[np.isfinite(depth)], depth[np.isfinite(depth)])


def test_masks_must_be_binary(tmp_path):
    Image.fromarray(np.full((4, 4), 128, dtype=np.uint8)).save(tmp_path / "m.png")
    with pytest.raises(ConfigError):
        load_mask(tmp_path / "m.png")
    with pytest.raises(MissingInput):
        load_mask(tmp_path / "absent.png")


def test_depth_scale_grows_with_the_deepest_pixel():
    assert depth_scale_for(np.array([[1.0, np.inf]])) == DEPTH_SCALE
    deep = np.array([[20.0, np.inf], [3.0, 13.1]])
    assert depth_scale_for(deep) == pytest.approx(20.0 / 65534)


def test_wide_rig_dataset_round_trip(tmp_path):
    spec = SceneSpec(cameras=CameraRigConfig(num_views=2, radius=9.0, width=16, height=16))
    scene, cameras = generate_scene(spec, seed=0)
    dataset = render_ground_truth(scene, cameras)
    deepest = max(float(v.depth[np.isfinite(v.depth)].max()) for v in dataset.views.values())
    assert deepest > 65535 * DEPTH_SCALE

    save_dataset(dataset, tmp_path / "synth")
    scale = read_json(tmp_path / "synth" / "manifest.json")["depth_scale"]
    assert scale > DEPTH_SCALE
    loaded = load_dataset(tmp_path / "synth")
    for index, view in dataset.views.items():
        finite = np.isfinite(view.depth)
        err = np.abs(loaded.views[index].depth[finite] - view.depth[finite])
        assert err.max() <= 0.5 * scale + 1e-9


def test_empty_scene_loads_without_object_renders(tmp_path, small_dataset):
    save_dataset(small_dataset, tmp_path / "synth")
    for path in (tmp_path / "synth" / "rgb").glob("*.png"):
        path.unlink()
    truth = load_empty_scene(tmp_path / "synth")
    assert truth.view_indices == small_dataset.view_indices
    for index, view in small_dataset.views.items():
        np.testing.assert_array_equal(truth.rgb[index], view.empty_rgb)
        np.testing.assert_array_equal(np.isfinite(truth.depth[index]), np.isfinite(view.empty_depth))
        np.testing.assert_array_equal(truth.cameras[index].cam_to_world, view.camera.cam_to_world)
    with pytest.raises(MissingInput):
        load_dataset(tmp_path / "synth")
