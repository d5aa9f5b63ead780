import numpy as np
import pytest

from inpaint360.errors import MissingDepth
from inpaint360.scene_synth.boxes import BoxFailureConfig, propose_boxes
from inpaint360.scene_synth.raytrace import render_ground_truth
from inpaint360.scene_synth.scene import CameraRigConfig, PrimitiveSpec, SceneSpec, generate_scene
from inpaint360.segment.io import load_maskset, save_maskset
from inpaint360.segment.masks import mask_iou
from inpaint360.segment.refine import backproject_pixels, initial_maskset, refine_depth_warp
from inpaint360.segment.segmenter import OracleSegmenter
from inpaint360.segment.types import MaskSet, RefineConfig

Z_TOL = 0.05


@pytest.fixture(scope="module")
def sphere_dataset():
    spec = SceneSpec(
        primitives=[PrimitiveSpec(kind="sphere", name="ball", center=(0.0, 0.0, 0.0), size=(0.5,), removable=True)],
        cameras=CameraRigConfig(num_views=6, width=32, height=32, elevation_deg=20.0),
    )
    scene, cameras = generate_scene(spec, seed=0)
    return render_ground_truth(scene, cameras)


def _truth(dataset):
    sphere = dataset.scene.by_name("ball").instance_id
    return {v: dataset.object_mask(v, sphere) for v in dataset.view_indices}


def _truncated_maskset(dataset):
    cfg = BoxFailureConfig(q_trunc=1.0, phi_min=0.5, phi_max=0.5)
    ids = {v: view.ids for v, view in dataset.views.items()}
    boxes = {v: propose_boxes(dataset.scene, v, ids[v], ["ball"], cfg, seed=1) for v in dataset.view_indices}
    return initial_maskset(boxes, 1, (32, 32), OracleSegmenter(ids), ids)


def _refine(dataset, maskset, **kwargs):
    depths = {v: view.depth for v, view in dataset.views.items()}
    segmenter = OracleSegmenter({v: view.ids for v, view in dataset.views.items()})
    cfg = RefineConfig(rays_per_view=40, **kwargs)
    return refine_depth_warp(maskset, depths, dataset.cameras, cfg, segmenter, z_tol=Z_TOL)


def test_backprojection_recovers_the_surface(sphere_dataset):
    view = sphere_dataset.views[0]
    rows, cols = np.nonzero(np.isfinite(view.depth))
    points = backproject_pixels(view.camera, rows, cols, view.depth[rows, cols])
    np.testing.assert_allclose(np.linalg.norm(points, axis=1), 0.5, atol=1e-9)


def test_full_masks_are_a_fixed_point(sphere_dataset):
    truth = _truth(sphere_dataset)
    maskset = MaskSet(masks={v: {0: m.copy()} for v, m in truth.items()}, prompts={v: {0: []} for v in truth})
    refined = _refine(sphere_dataset, maskset)
    assert refined.prompt_count("warped") == 0
    assert refined.checksum() == maskset.checksum()
    assert refined.iterations == 1


def test_truncated_masks_grow_toward_ground_truth(sphere_dataset):
    truth = _truth(sphere_dataset)
    initial = _truncated_maskset(sphere_dataset)
    refined = _refine(sphere_dataset, initial)
    before = {v: mask_iou(initial.masks[v][0], truth[v]) for v in truth}
    after = {v: mask_iou(refined.masks[v][0], truth[v]) for v in truth}
    assert all(after[v] >= before[v] for v in truth)
    assert np.mean(list(after.values())) > np.mean(list(before.values())) + 0.1
    assert refined.prompt_count("warped") > 0
    assert refined.history[0].prompts_added > 0
    assert refined.history[-1].mean_area >= initial.mean_area()


def test_refinement_is_deterministic(sphere_dataset):
    a = _refine(sphere_dataset, _truncated_maskset(sphere_dataset), seed=3)
    b = _refine(sphere_dataset, _truncated_maskset(sphere_dataset), seed=3)
    assert a.checksum() == b.checksum()
    assert a.prompt_count() == b.prompt_count()


def test_missing_depth_rejected(sphere_dataset):
    maskset = _truncated_maskset(sphere_dataset)
    depths = {v: view.depth for v, view in sphere_dataset.views.items() if v != 2}
    with pytest.raises(MissingDepth) as info:
        refine_depth_warp(maskset, depths, sphere_dataset.cameras, RefineConfig(), OracleSegmenter({}), z_tol=Z_TOL)
    assert info.value.view == 2


def test_maskset_round_trip(tmp_path, sphere_dataset):
    refined = _refine(sphere_dataset, _truncated_maskset(sphere_dataset))
    save_maskset(refined, tmp_path / "segment")
    loaded = load_maskset(tmp_path / "segment")
    assert loaded.checksum() == refined.checksum()
    assert loaded.prompt_count() == refined.prompt_count()
    assert loaded.iterations == refined.iterations
    assert [b.bounds for b in loaded.boxes[0]] == [b.bounds for b in refined.boxes[0]]


class _CornerSegmenter:
    """Answers every prompt set with one corner pixel, as a segmenter locking onto a neighbour would."""

    def segment(self, view, object_index, prompts, box):
        mask = np.zeros((32, 32), dtype=bool)
        mask[0, 0] = True
        return mask


def test_shrinking_answers_keep_the_previous_mask(sphere_dataset):
    initial = _truncated_maskset(sphere_dataset)
    depths = {v: view.depth for v, view in sphere_dataset.views.items()}
    refined = refine_depth_warp(
        initial, depths, sphere_dataset.cameras, RefineConfig(rays_per_view=40, max_rounds=2), _CornerSegmenter(), z_tol=Z_TOL
    )
    assert refined.prompt_count("warped") > 0
    for view in refined.views:
        before, after = initial.masks[view][0], refined.masks[view][0]
        assert not np.any(before & ~after)
        if before.any():
            np.testing.assert_array_equal(after, before)


@pytest.fixture(scope="module")
def neighbour_dataset():
    spec = SceneSpec(
        primitives=[
            PrimitiveSpec(kind="sphere", name="ball", center=(0.0, -0.2, 0.0), size=(0.3,), removable=True),
            PrimitiveSpec(kind="sphere", name="globe", center=(0.0, 0.42, 0.0), size=(0.3,)),
        ],
        cameras=CameraRigConfig(num_views=6, width=32, height=32, elevation_deg=20.0),
    )
    scene, cameras = generate_scene(spec, seed=0)
    return render_ground_truth(scene, cameras)


def test_mask_area_never_decreases_next_to_a_neighbour(neighbour_dataset):
    initial = _truncated_maskset(neighbour_dataset)
    areas = [{v: int(initial.masks[v][0].sum()) for v in initial.views}]
    depths = {v: view.depth for v, view in neighbour_dataset.views.items()}
    segmenter = OracleSegmenter({v: view.ids for v, view in neighbour_dataset.views.items()})
    refined = refine_depth_warp(
        initial, depths, neighbour_dataset.cameras, RefineConfig(rays_per_view=60, max_rounds=3, z_tol=0.3), segmenter,
        on_round=lambda _, current: areas.append({v: int(current.masks[v][0].sum()) for v in current.views}),
    )
    for earlier, later in zip(areas, areas[1:]):
        assert all(later[v] >= earlier[v] for v in earlier)
    history = [initial.mean_area()] + [stats.mean_area for stats in refined.history]
    assert history == sorted(history)


def test_invalid_target_depth_rejects_warped_prompts(sphere_dataset):
    truth = _truth(sphere_dataset)

    def refine_into_view_zero(depth_zero):
        masks = {v: {0: (m.copy() if v != 0 else np.zeros_like(m))} for v, m in truth.items()}
        maskset = MaskSet(masks=masks, prompts={v: {0: []} for v in truth})
        depths = {v: view.depth for v, view in sphere_dataset.views.items()}
        depths[0] = depth_zero
        cfg = RefineConfig(rays_per_view=40, max_rounds=1, views_per_target=5)
        return refine_depth_warp(maskset, depths, sphere_dataset.cameras, cfg, _CornerSegmenter(), z_tol=Z_TOL)

    valid = refine_into_view_zero(sphere_dataset.views[0].depth)
    assert any(p.source == "warped" for p in valid.prompts[0][0])
    invalid = refine_into_view_zero(np.full((32, 32), np.nan))
    assert not any(p.source == "warped" for p in invalid.prompts[0][0])


@pytest.mark.slow
def test_refinement_recovers_truncated_detections_on_the_flowerpot_scene():
    spec = SceneSpec(cameras=CameraRigConfig(num_views=12))
    scene, cameras = generate_scene(spec, seed=0)
    dataset = render_ground_truth(scene, cameras)
    objects = ["flowerpot", "flowers"]
    targets = [scene.by_name(name).instance_id for name in objects]
    ids = {v: view.ids for v, view in dataset.views.items()}
    truth = {v: np.isin(ids[v], targets) for v in dataset.view_indices}
    cfg = BoxFailureConfig(q_trunc=0.3, phi_min=0.3, phi_max=0.7)
    boxes = {v: propose_boxes(scene, v, ids[v], objects, cfg, seed=0) for v in dataset.view_indices}
    assert any(box.truncated for proposals in boxes.values() for box in proposals)
    initial = initial_maskset(boxes, len(objects), ids[0].shape, OracleSegmenter(ids), ids)

    def mean_iou(maskset):
        return float(np.mean([mask_iou(maskset.union(v), truth[v]) for v in maskset.views]))

    ious = [mean_iou(initial)]
    depths = {v: view.depth for v, view in dataset.views.items()}
    refine_depth_warp(
        initial, depths, dataset.cameras, RefineConfig(max_rounds=3), OracleSegmenter(ids), z_tol=0.1,
        on_round=lambda _, current: ious.append(mean_iou(current)),
    )
    assert len(ious) <= 4
    assert ious == sorted(ious)
    assert ious[-1] >= 0.95
    assert ious[-1] > ious[0]
