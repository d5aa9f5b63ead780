"""Mask set persistence and the prompt exchange files."""

from __future__ import annotations

from pathlib import Path
from typing import Union

from inpaint360.documents import read_json, write_json
from inpaint360.errors import MissingInput
from inpaint360.scene_synth.io import load_mask, save_mask
from .types import BoxProposal, MaskSet, PointPrompt, RoundStats

PathLike = Union[str, Path]


def save_prompts(path: PathLike, prompts: list[PointPrompt]) -> Path:
    return write_json(path, [p.to_document() for p in prompts])


def load_prompts(path: PathLike) -> list[PointPrompt]:
    return [PointPrompt.from_document(doc) for doc in read_json(path)]


def save_maskset(maskset: MaskSet, directory: PathLike) -> Path:
    """
    Layout::

        masks/<view>.png            union mask per view
        objects/<view>_q<q>.png     per-object masks
        prompts/<view>_q<q>.json    prompt exchange files
        maskset.json                boxes, iteration count and round history
    """
    directory = Path(directory)
    views = {}
    for view in maskset.views:
        save_mask(directory / "masks" / f"{view:03d}.png", maskset.union(view))
        objects = sorted(maskset.masks[view])
        for q in objects:
            save_mask(directory / "objects" / f"{view:03d}_q{q}.png", maskset.masks[view][q])
            save_prompts(directory / "prompts" / f"{view:03d}_q{q}.json", maskset.prompts.get(view, {}).get(q, []))
        views[str(view)] = {
            "objects": objects,
            "boxes": [b.to_document() for b in maskset.boxes.get(view, [])],
        }
    document = {
        "iterations": maskset.iterations,
        "history": [vars(s) for s in maskset.history],
        "views": views,
    }
    return write_json(directory / "maskset.json", document)


def load_maskset(directory: PathLike) -> MaskSet:
    directory = Path(directory)
    document = read_json(directory / "maskset.json")
    masks, prompts, boxes = {}, {}, {}
    for key, entry in document["views"].items():
        view = int(key)
        masks[view] = {q: load_mask(directory / "objects" / f"{view:03d}_q{q}.png") for q in entry["objects"]}
        prompts[view] = {q: load_prompts(directory / "prompts" / f"{view:03d}_q{q}.json") for q in entry["objects"]}
        boxes[view] = [BoxProposal.from_document(b) for b in entry["boxes"]]
    return MaskSet(
        masks=dict(sorted(masks.items())),
        prompts=prompts,
        boxes=boxes,
        iterations=int(document["iterations"]),
        history=[RoundStats(**s) for s in document["history"]],
    )


def load_union_masks(directory: PathLike, views: list[int]) -> dict:
    """Per-view union masks ``<directory>/<view>.png`` (external mask slot or ``masks/``)."""
    directory = Path(directory)
    if not directory.is_dir():
        raise MissingInput(str(directory), "mask directory")
    return {view: load_mask(directory / f"{view:03d}.png") for view in views}
