import numpy as np
import pytest

from inpaint360.errors import DimensionMismatch
from inpaint360.scene_synth.inpainter import InpainterPerturbation, simulate_inpainting


def _removal_masks(dataset):
    removable = dataset.scene.removable_ids
    return {i: np.isin(v.ids, removable) for i, v in dataset.views.items()}


def test_zero_perturbation_reproduces_the_empty_scene(small_dataset):
    masks = _removal_masks(small_dataset)
    out = simulate_inpainting(small_dataset, masks, InpainterPerturbation(color_shift=0.0, blob_noise=0.0))
    for index, view in small_dataset.views.items():
        np.testing.assert_array_equal(out[index][masks[index]], view.empty_rgb[masks[index]])


def test_outside_mask_untouched(small_dataset):
    masks = _removal_masks(small_dataset)
    out = simulate_inpainting(small_dataset, masks, InpainterPerturbation(color_shift=0.3, blob_noise=0.2, seed=9))
    for index, view in small_dataset.views.items():
        np.testing.assert_array_equal(out[index][~masks[index]], view.rgb[~masks[index]])
        assert np.all((out[index] >= 0.0) & (out[index] <= 1.0))


def test_views_disagree_inside_the_mask(small_dataset):
    masks = _removal_masks(small_dataset)
    out = simulate_inpainting(small_dataset, masks, InpainterPerturbation())
    errors = [np.abs(out[i] - v.empty_rgb)[masks[i]].mean() for i, v in small_dataset.views.items()]
    assert min(errors) > 0.0
    assert len(set(np.round(errors, 6))) > 1


def test_unknown_view_rejected(small_dataset):
    with pytest.raises(DimensionMismatch):
        simulate_inpainting(small_dataset, {99: np.zeros((32, 32), dtype=bool)})
