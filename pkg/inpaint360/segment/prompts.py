from typing import Optional

import numpy as np

from inpaint360.scene_synth.primitives import BACKGROUND_ID
from .types import BoxProposal, PointPrompt

# box center, then the four quarter points
_SEED_FRACTIONS = ((0.5, 0.5), (0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75))
PROMPTS_PER_BOX = len(_SEED_FRACTIONS)


def box_majority_id(box: BoxProposal, id_map: np.ndarray) -> int:
    """Most frequent non-background instance inside ``box`` (background if none)."""
    inner = id_map[box.top:box.bottom, box.left:box.right].ravel()
    inner = inner[inner != BACKGROUND_ID]
    if inner.size == 0:
        return BACKGROUND_ID
    return int(np.bincount(inner).argmax())


def seed_prompts_from_box(box: BoxProposal, id_map: Optional[np.ndarray] = None, view: int = 0) -> list[PointPrompt]:
    """
    Up to five positive prompts inside ``box``, snapped to pixel centers.

    With an ``id_map`` the prompts that land on anything but the box's
    majority instance are dropped.
    """
    target = box_majority_id(box, id_map) if id_map is not None else None
    seen = set()
    prompts = []
    for fu, fv in _SEED_FRACTIONS:
        col = min(int(np.floor(box.left + fu * box.width)), box.right - 1)
        row = min(int(np.floor(box.top + fv * box.height)), box.bottom - 1)
        if (row, col) in seen:
            continue
        seen.add((row, col))
        if target is not None and int(id_map[row, col]) != target:
            continue
        prompts.append(
            PointPrompt(u=col + 0.5, v=row + 0.5, source="box-seed", origin_view=view, object_index=box.object_index)
        )
    return prompts
