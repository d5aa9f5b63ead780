import numpy as np

from inpaint360.segment.masks import mask_iou, union_masks
from inpaint360.segment.prompts import PROMPTS_PER_BOX, box_majority_id, seed_prompts_from_box
from inpaint360.segment.types import BoxProposal


def test_uniform_box_gives_five_prompts():
    ids = np.full((10, 10), 3, dtype=np.uint8)
    box = BoxProposal(left=0, right=10, top=0, bottom=10, object_index=0)
    prompts = seed_prompts_from_box(box, ids)
    assert len(prompts) == PROMPTS_PER_BOX == 5
    assert all(p.inside(10, 10) and p.source == "box-seed" for p in prompts)
    assert (prompts[0].u, prompts[0].v) == (5.5, 5.5)


def test_center_over_a_hole_is_dropped():
    ids = np.full((10, 10), 3, dtype=np.uint8)
    ids[4:7, 4:7] = 0
    box = BoxProposal(left=0, right=10, top=0, bottom=10, object_index=0)
    prompts = seed_prompts_from_box(box, ids)
    assert len(prompts) == 4
    assert all(ids[p.pixel] == 3 for p in prompts)


def test_single_pixel_box_deduplicates():
    box = BoxProposal(left=2, right=3, top=7, bottom=8, object_index=1)
    prompts = seed_prompts_from_box(box, view=4)
    assert len(prompts) == 1
    assert prompts[0].pixel == (7, 2)
    assert prompts[0].origin_view == 4
    assert prompts[0].object_index == 1


def test_majority_ignores_background():
    ids = np.zeros((4, 4), dtype=np.uint8)
    ids[0, 0] = 2
    box = BoxProposal(left=0, right=4, top=0, bottom=4, object_index=0)
    assert box_majority_id(box, ids) == 2


def test_union_of_one_mask_is_itself():
    mask = np.eye(5, dtype=bool)
    np.testing.assert_array_equal(union_masks([mask]), mask)


def test_union_of_disjoint_masks_adds_areas():
    a = np.zeros((6, 6), dtype=bool)
    b = np.zeros((6, 6), dtype=bool)
    a[:2] = True
    b[4:] = True
    assert union_masks([a, b]).sum() == a.sum() + b.sum()
    assert mask_iou(a, b) == 0.0
    assert mask_iou(np.zeros((3, 3), bool), np.zeros((3, 3), bool)) == 1.0
