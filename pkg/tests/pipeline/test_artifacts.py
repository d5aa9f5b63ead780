import pytest

from inpaint360.errors import MissingInput
from inpaint360.pipeline.artifacts import (
    RunLayout,
    fingerprint,
    gather_inputs,
    is_up_to_date,
    stage_outputs,
    write_stage_manifest,
)


def _finished_stage(tmp_path, stage="train", content=b"weights"):
    layout = RunLayout(tmp_path)
    layout.stage_dir(stage).mkdir(parents=True)
    (layout.stage_dir(stage) / "field.ckpt").write_bytes(content)
    stage_fingerprint = fingerprint(stage, {"iterations": 10}, 0, {})
    write_stage_manifest(layout, stage, stage_fingerprint, 0, {})
    return layout, stage_fingerprint


def test_fingerprint_depends_on_every_part():
    base = fingerprint("train", {"iterations": 10}, 0, {"synth/a.png": "00"})
    assert base == fingerprint("train", {"iterations": 10}, 0, {"synth/a.png": "00"})
    assert base != fingerprint("retrain", {"iterations": 10}, 0, {"synth/a.png": "00"})
    assert base != fingerprint("train", {"iterations": 11}, 0, {"synth/a.png": "00"})
    assert base != fingerprint("train", {"iterations": 10}, 1, {"synth/a.png": "00"})
    assert base != fingerprint("train", {"iterations": 10}, 0, {"synth/a.png": "01"})


def test_finished_stage_is_up_to_date(tmp_path):
    layout, stage_fingerprint = _finished_stage(tmp_path)
    assert is_up_to_date(layout, "train", stage_fingerprint)
    assert not is_up_to_date(layout, "train", fingerprint("train", {"iterations": 11}, 0, {}))
    assert stage_outputs(layout, "train") == gather_inputs(layout, ["train"])
    assert list(stage_outputs(layout, "train")) == ["train/field.ckpt"]


def test_tampered_output_is_stale(tmp_path):
    layout, stage_fingerprint = _finished_stage(tmp_path)
    (layout.stage_dir("train") / "field.ckpt").write_bytes(b"changed")
    assert not is_up_to_date(layout, "train", stage_fingerprint)


def test_deleted_output_is_stale(tmp_path):
    layout, stage_fingerprint = _finished_stage(tmp_path)
    (layout.stage_dir("train") / "field.ckpt").unlink()
    assert not is_up_to_date(layout, "train", stage_fingerprint)


def test_unfinished_upstream(tmp_path):
    layout, _ = _finished_stage(tmp_path)
    assert not is_up_to_date(layout, "segment", "anything")
    with pytest.raises(MissingInput) as info:
        gather_inputs(layout, ["train", "segment"])
    assert "segment" in str(info.value)
    assert info.value.exit_code == 3
