import numpy as np
import pytest

from inpaint360.errors import EmptyPrompts, MissingInput
from inpaint360.scene_synth.boxes import tight_box, truncate_box
from inpaint360.scene_synth.io import save_mask
from inpaint360.segment.masks import mask_iou
from inpaint360.segment.prompts import seed_prompts_from_box
from inpaint360.segment.segmenter import ExternalSegmenter, oracle_segment
from inpaint360.segment.types import PointPrompt


@pytest.fixture
def id_map():
    ids = np.zeros((32, 32), dtype=np.uint8)
    ids[8:24, 4:28] = 5
    ids[0:4, 0:4] = 9
    return ids


def test_full_box_gives_ground_truth(id_map):
    box = tight_box(id_map == 5, 0)
    mask = oracle_segment(id_map, seed_prompts_from_box(box, id_map), box)
    assert mask_iou(mask, id_map == 5) == 1.0


def test_truncated_box_clips_the_mask(id_map):
    truth = id_map == 5
    box = truncate_box(tight_box(truth, 0), truth, 0.5, "right")
    mask = oracle_segment(id_map, seed_prompts_from_box(box, id_map), box)
    assert mask_iou(mask, truth) == pytest.approx(0.5, abs=0.05)


def test_warped_prompt_lifts_the_clip(id_map):
    truth = id_map == 5
    box = truncate_box(tight_box(truth, 0), truth, 0.5, "right")
    prompts = seed_prompts_from_box(box, id_map)
    prompts.append(PointPrompt(u=26.5, v=12.5, source="warped", origin_view=3))
    assert mask_iou(oracle_segment(id_map, prompts, box), truth) == 1.0


def test_no_prompts_rejected(id_map):
    with pytest.raises(EmptyPrompts):
        oracle_segment(id_map, [])


def test_background_prompts_give_empty_mask(id_map):
    mask = oracle_segment(id_map, [PointPrompt(u=30.5, v=30.5, source="box-seed", origin_view=0)])
    assert not mask.any()


def test_external_segmenter_reads_masks_and_writes_prompts(tmp_path, id_map):
    save_mask(tmp_path / "masks" / "002.png", id_map == 5)
    save_mask(tmp_path / "masks" / "002_q1.png", id_map == 9)
    segmenter = ExternalSegmenter(tmp_path / "masks", tmp_path / "prompts")
    prompt = [PointPrompt(u=1.5, v=1.5, source="box-seed", origin_view=2)]
    np.testing.assert_array_equal(segmenter.segment(2, 0, prompt, None), id_map == 5)
    np.testing.assert_array_equal(segmenter.segment(2, 1, prompt, None), id_map == 9)
    assert (tmp_path / "prompts" / "002_q1.json").exists()
    with pytest.raises(MissingInput):
        ExternalSegmenter(tmp_path / "absent")
