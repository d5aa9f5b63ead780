import numpy as np
import pytest

from inpaint360.errors import DimensionMismatch, PatchTooLarge
from inpaint360.perceptual.patches import extract_patches, partition_patches, scatter_patches


def test_empty_mask_has_no_inpainted_patches():
    patches = partition_patches(np.zeros((8, 8), dtype=bool), 4)
    assert len(patches) == 4
    assert patches.with_inpainted.shape == (0, 2)


def test_full_mask_has_no_untouched_patches():
    patches = partition_patches(np.ones((8, 8), dtype=bool), 4)
    assert patches.without_inpainted.shape == (0, 2)


def test_single_masked_pixel_marks_one_patch():
    mask = np.zeros((4, 4), dtype=bool)
    mask[0, 0] = True
    patches = partition_patches(mask, 2)
    assert len(patches) == 4
    assert patches.inpainted.sum() == 1
    np.testing.assert_array_equal(patches.with_inpainted, [[0, 0]])


def test_stride_and_partial_tiling():
    patches = partition_patches(np.zeros((10, 7), dtype=bool), 3, stride=2)
    assert {tuple(a) for a in patches.anchors} == {(r, c) for r in (0, 2, 4, 6) for c in (0, 2, 4)}


def test_oversized_patch_rejected():
    with pytest.raises(PatchTooLarge):
        partition_patches(np.zeros((4, 4), dtype=bool), 5)


def test_extract_and_scatter_cover_the_tiling():
    image = np.arange(6 * 6 * 3, dtype=np.float64).reshape(6, 6, 3)
    patches = partition_patches(np.zeros((6, 6), dtype=bool), 3)
    stack = extract_patches(image, patches)
    assert stack.shape == (4, 3, 3, 3)
    np.testing.assert_array_equal(scatter_patches(stack, patches), image)
    with pytest.raises(DimensionMismatch):
        extract_patches(np.zeros((5, 6, 3)), patches)
