"""Oracle box proposals with controllable detector failures."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from pydantic import BaseModel, Field, model_validator

from inpaint360.segment.types import BoxProposal
from .scene import Scene

_SIDES = ("left", "right", "top", "bottom")


class BoxFailureConfig(BaseModel):
    q_trunc: float = Field(0.0, ge=0, le=1)
    q_miss: float = Field(0.0, ge=0, le=1)
    phi_min: float = Field(0.3, gt=0, le=1)
    phi_max: float = Field(0.7, gt=0, le=1)

    @model_validator(mode="after")
    def _phi_ordered(self):
        if self.phi_min > self.phi_max:
            raise ValueError(f"phi_min {self.phi_min} exceeds phi_max {self.phi_max}")
        return self


def tight_box(mask: np.ndarray, object_index: int) -> BoxProposal:
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    return BoxProposal(
        left=int(cols[0]), right=int(cols[-1]) + 1, top=int(rows[0]), bottom=int(rows[-1]) + 1,
        object_index=object_index,
    )


def _cut(counts: np.ndarray, keep: float) -> int:
    """Smallest prefix length of ``counts`` holding at least ``keep`` of the total."""
    cumulative = np.cumsum(counts)
    return int(np.searchsorted(cumulative, keep * cumulative[-1] - 1e-9)) + 1


def truncate_box(box: BoxProposal, mask: np.ndarray, phi: float, side: str) -> BoxProposal:
    """Shrink ``box`` from ``side`` until it covers about ``phi`` of the object's pixels."""
    inner = mask[box.top:box.bottom, box.left:box.right]
    left, right, top, bottom = box.bounds
    if side in ("left", "right"):
        counts = inner.sum(axis=0)
        if side == "right":
            right = left + _cut(counts, phi)
        else:
            left = right - _cut(counts[::-1], phi)
    else:
        counts = inner.sum(axis=1)
        if side == "bottom":
            bottom = top + _cut(counts, phi)
        else:
            top = bottom - _cut(counts[::-1], phi)
    return BoxProposal(
        left=left, right=right, top=top, bottom=bottom,
        object_index=box.object_index, score=box.score, truncated=True,
    )


def propose_boxes(
    scene: Scene,
    view: int,
    ids: np.ndarray,
    instruction_objects: Sequence[str],
    failure_cfg: BoxFailureConfig = None,
    seed: int = 0,
) -> list[BoxProposal]:
    """
    One box per named object visible in ``ids``, degraded per ``failure_cfg``.

    ``side`` names the edge that is pulled inward. Every random draw for
    ``(seed, view, object)`` happens up front, so toggling one failure mode
    never reshuffles the other.
    """
    failure_cfg = failure_cfg or BoxFailureConfig()
    targets = [scene.by_name(name).instance_id for name in instruction_objects]
    proposals = []
    for q, instance_id in enumerate(targets):
        rng = np.random.default_rng([seed, view, q])
        miss_draw, trunc_draw, phi_draw, side_draw = rng.random(4)
        mask = ids == instance_id
        if not mask.any() or miss_draw < failure_cfg.q_miss:
            continue
        box = tight_box(mask, q)
        if trunc_draw < failure_cfg.q_trunc:
            phi = failure_cfg.phi_min + (failure_cfg.phi_max - failure_cfg.phi_min) * phi_draw
            box = truncate_box(box, mask, phi, _SIDES[int(side_draw * len(_SIDES))])
        proposals.append(box)
    return proposals
