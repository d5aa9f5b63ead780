import numpy as np
import pytest

from inpaint360.errors import NumericalFailure
from inpaint360.field.grid import RadianceField
from inpaint360.pipeline.evaluate import (
    PSNR_CAP,
    EvalReport,
    ViewRow,
    ablation_summary,
    evaluate_images,
    floater_mass,
    in_mask_l1,
    lpips_proxy,
    psnr,
)
from inpaint360.scene_synth.inpainter import InpainterPerturbation, simulate_inpainting


def _removal_masks(dataset):
    removable = dataset.scene.removable_ids
    return {v: np.isin(dataset.views[v].ids, removable) for v in dataset.view_indices}


def test_psnr_values():
    image = np.full((4, 4, 3), 0.5)
    assert psnr(image, image) == PSNR_CAP
    assert psnr(image + 0.1, image) == pytest.approx(20.0)


def test_empty_mask_metrics_are_zero():
    rng = np.random.default_rng(0)
    a, b = rng.random((16, 16, 3)), rng.random((16, 16, 3))
    empty = np.zeros((16, 16), dtype=bool)
    assert in_mask_l1(a, b, empty) == 0.0
    assert lpips_proxy(a, b, empty, 8) == 0.0


def test_in_mask_l1_ignores_outside():
    target = np.zeros((8, 8, 3))
    rendered = np.ones((8, 8, 3))
    rendered[:4] = 0.0
    rendered[:4, :, 0] = 0.25
    mask = np.zeros((8, 8), dtype=bool)
    mask[:4] = True
    assert in_mask_l1(rendered, target, mask) == pytest.approx(0.25 / 3)


def test_ground_truth_scores_perfectly(small_dataset):
    masks = _removal_masks(small_dataset)
    empty = small_dataset.empty_images()
    depths = {v: small_dataset.views[v].empty_depth for v in small_dataset.view_indices}
    report = evaluate_images("gt", empty, empty, masks, small_dataset.cameras, depths, 8, 0.05)
    report.check_finite()
    assert [row.view for row in report.rows] == small_dataset.view_indices
    assert report.aggregate["psnr"] == PSNR_CAP
    assert report.aggregate["in_mask_l1"] == 0.0
    assert report.aggregate["lpips_proxy"] == pytest.approx(0.0, abs=1e-12)
    assert "floater_mass" not in report.aggregate


def test_per_view_perturbations_raise_inconsistency(small_dataset):
    masks = _removal_masks(small_dataset)
    empty = small_dataset.empty_images()
    depths = {v: small_dataset.views[v].empty_depth for v in small_dataset.view_indices}
    noisy = simulate_inpainting(small_dataset, masks, InpainterPerturbation(color_shift=0.3, blob_noise=0.2, seed=4))
    clean = evaluate_images("gt", empty, empty, masks, small_dataset.cameras, depths, 8, 0.05)
    perturbed = evaluate_images("noisy", noisy, empty, masks, small_dataset.cameras, depths, 8, 0.05)
    assert perturbed.aggregate["inconsistency"] > clean.aggregate["inconsistency"]
    assert perturbed.aggregate["in_mask_l1"] > 0.0
    assert perturbed.aggregate["psnr"] < PSNR_CAP


@pytest.fixture
def plane_setup(front_camera):
    # empty scene: a wall through y = 0, three units in front of the camera
    mask = np.zeros((32, 32), dtype=bool)
    mask[12:20, 12:20] = True
    return {0: mask}, {0: front_camera}, {0: np.full((32, 32), 3.0)}


def _field_with(*nodes):
    field = RadianceField(9, dtype=np.float64, init_density=-30.0)
    for node in nodes:
        field.density_param[node] = 5.0
    return field


def test_floater_in_front_of_the_wall_counts(plane_setup):
    masks, cameras, depths = plane_setup
    field = _field_with((4, 2, 4))
    inside, outside = floater_mass(field, masks, cameras, depths, margin=0.05, density_floor=0.01)
    assert inside == pytest.approx(np.log1p(np.exp(5.0)) * 0.25 ** 3)
    assert outside == 0.0


def test_density_behind_the_wall_or_outside_the_mask_does_not_count(plane_setup):
    masks, cameras, depths = plane_setup
    field = _field_with((4, 6, 4), (7, 2, 7))
    inside, outside = floater_mass(field, masks, cameras, depths, margin=0.05, density_floor=0.01)
    assert inside == 0.0
    assert outside == pytest.approx(2 * np.log1p(np.exp(5.0)) * 0.25 ** 3)


def _report(variant, lpips, l1, mass):
    row = ViewRow(view=0, psnr=30.0, in_mask_l1=l1, lpips_proxy=lpips, inconsistency=0.01)
    return EvalReport(variant=variant, rows=[row], floater_mass=mass, out_of_region_mass=1.0)


def test_ablation_ordering():
    reports = {
        "base": _report("base", 0.4, 0.2, 3.0),
        "in": _report("in", 0.3, 0.15, 3.0),
        "geom": _report("geom", 0.35, 0.18, 1.0),
        "full": _report("full", 0.25, 0.1, 1.0),
    }
    summary = ablation_summary(reports, reference_mass=0.5)
    assert list(summary["variants"]) == ["base", "full", "geom", "in"]
    assert all(summary["ordering"].values())
    assert set(summary["ordering"]) == {
        "lpips_proxy_full_best", "lpips_proxy_singles_beat_base",
        "in_mask_l1_full_best", "in_mask_l1_singles_beat_base", "geom_reduces_floaters",
    }
    assert summary["reference_floater_mass"] == 0.5


def test_ablation_ordering_violation_is_reported():
    reports = {
        "base": _report("base", 0.2, 0.2, 1.0),
        "in": _report("in", 0.3, 0.15, 1.0),
        "geom": _report("geom", 0.35, 0.18, 2.0),
        "full": _report("full", 0.25, 0.1, 1.0),
    }
    ordering = ablation_summary(reports)["ordering"]
    assert not ordering["lpips_proxy_singles_beat_base"]
    assert not ordering["geom_reduces_floaters"]
    assert ordering["in_mask_l1_full_best"]


def test_partial_variant_set_has_no_ordering():
    summary = ablation_summary({"base": _report("base", 0.4, 0.2, 1.0)})
    assert summary["ordering"] == {}
    assert "reference_floater_mass" not in summary


def test_non_finite_report_fails():
    report = _report("full", float("nan"), 0.1, 1.0)
    with pytest.raises(NumericalFailure):
        report.check_finite()
    assert report.to_document()["variant"] == "full"
