"""Promptable segmenters: the ground-truth oracle and the external file slot."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Optional, Protocol, Sequence, Union

import numpy as np

from inpaint360.documents import write_json
from inpaint360.errors import EmptyPrompts, MissingInput
from inpaint360.scene_synth.io import load_mask
from inpaint360.scene_synth.primitives import BACKGROUND_ID
from .types import BoxProposal, PointPrompt


class Segmenter(Protocol):
    def segment(
        self, view: int, object_index: int, prompts: Sequence[PointPrompt], box: Optional[BoxProposal]
    ) -> np.ndarray: ...


def oracle_segment(ids: np.ndarray, prompts: Sequence[PointPrompt], box: Optional[BoxProposal] = None) -> np.ndarray:
    """
    Ground-truth mask of the instance most prompts land on.

    A truncated seeding box with no warped prompts yet clips the mask to the
    box, which reproduces the partial masks a real segmenter returns for a
    partial detection.
    """
    if not prompts:
        raise EmptyPrompts("segmentation needs at least one prompt")
    height, width = ids.shape
    votes = [
        int(ids[p.pixel])
        for p in prompts
        if p.inside(width, height)
    ]
    votes = [v for v in votes if v != BACKGROUND_ID]
    if not votes:
        return np.zeros(ids.shape, dtype=bool)
    target = int(np.bincount(votes).argmax())
    mask = ids == target
    if box is not None and box.truncated and not any(p.source == "warped" for p in prompts):
        mask &= box.mask(height, width)
    return mask


class OracleSegmenter:
    def __init__(self, id_maps: Mapping[int, np.ndarray]):
        self.id_maps = id_maps

    def segment(self, view, object_index, prompts, box):
        return oracle_segment(self.id_maps[view], prompts, box)


class ExternalSegmenter:
    """
    Consumes masks produced outside the process.

    Prompts handed to it are written as exchange files
    ``<prompts_dir>/<view>_q<object>.json`` so an external tool can answer
    them; masks are read from ``<masks_dir>/<view>_q<object>.png`` or, failing
    that, the per-view union mask ``<masks_dir>/<view>.png``.
    """

    def __init__(self, masks_dir: Union[str, Path], prompts_dir: Union[str, Path, None] = None):
        self.masks_dir = Path(masks_dir)
        self.prompts_dir = Path(prompts_dir) if prompts_dir is not None else None
        if not self.masks_dir.is_dir():
            raise MissingInput(str(self.masks_dir), "external masks directory")

    def segment(self, view, object_index, prompts, box):
        if self.prompts_dir is not None:
            write_json(
                self.prompts_dir / f"{view:03d}_q{object_index}.json",
                [p.to_document() for p in prompts],
            )
        per_object = self.masks_dir / f"{view:03d}_q{object_index}.png"
        if per_object.exists():
            return load_mask(per_object)
        return load_mask(self.masks_dir / f"{view:03d}.png")
