"""Data carried between detection, prompting, segmentation and refinement."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field

from inpaint360.errors import DimensionMismatch, OutOfBounds

PromptSource = Literal["box-seed", "warped"]


@dataclass(frozen=True)
class Instruction:
    text: str
    objects: tuple[str, ...]

    def __post_init__(self):
        if not self.objects:
            raise ValueError("an instruction names at least one object")


@dataclass(frozen=True)
class BoxProposal:
    """Pixel bounds with exclusive ``right``/``bottom``: columns ``left..right-1``, rows ``top..bottom-1``."""

    left: int
    right: int
    top: int
    bottom: int
    object_index: int
    score: float = 1.0
    truncated: bool = False

    def __post_init__(self):
        if not (self.left < self.right and self.top < self.bottom):
            raise ValueError(f"degenerate box {self.bounds}")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"box score {self.score} outside [0, 1]")

    @property
    def bounds(self) -> tuple[int, int, int, int]:
        return self.left, self.right, self.top, self.bottom

    @property
    def width(self) -> int:
        return self.right - self.left

    @property
    def height(self) -> int:
        return self.bottom - self.top

    def check_inside(self, width: int, height: int) -> None:
        if self.left < 0 or self.top < 0 or self.right > width or self.bottom > height:
            raise OutOfBounds(f"box {self.bounds} exceeds image {width}x{height}")

    def mask(self, height: int, width: int) -> np.ndarray:
        out = np.zeros((height, width), dtype=bool)
        out[self.top:self.bottom, self.left:self.right] = True
        return out

    def to_document(self) -> dict:
        return {
            "left": self.left, "right": self.right, "top": self.top, "bottom": self.bottom,
            "object_index": self.object_index, "score": self.score, "truncated": self.truncated,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "BoxProposal":
        return cls(
            left=int(doc["left"]), right=int(doc["right"]), top=int(doc["top"]), bottom=int(doc["bottom"]),
            object_index=int(doc["object_index"]), score=float(doc["score"]), truncated=bool(doc["truncated"]),
        )


@dataclass(frozen=True)
class PointPrompt:
    u: float
    v: float
    source: PromptSource
    origin_view: int
    object_index: int = 0
    polarity: Literal["positive"] = "positive"

    @property
    def pixel(self) -> tuple[int, int]:
        """(row, col) of the pixel holding this prompt."""
        return int(np.floor(self.v)), int(np.floor(self.u))

    def inside(self, width: int, height: int) -> bool:
        return 0.0 <= self.u < width and 0.0 <= self.v < height

    def to_document(self) -> dict:
        return {
            "u": self.u, "v": self.v, "polarity": self.polarity, "source": self.source,
            "origin_view": self.origin_view, "object_index": self.object_index,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "PointPrompt":
        if doc.get("polarity", "positive") != "positive":
            raise ValueError(f"only positive prompts are supported, got {doc['polarity']!r}")
        return cls(
            u=float(doc["u"]), v=float(doc["v"]), source=doc["source"],
            origin_view=int(doc["origin_view"]), object_index=int(doc.get("object_index", 0)),
        )


class RefineConfig(BaseModel):
    views_per_target: int = Field(5, ge=1)
    rays_per_view: int = Field(20, ge=1)
    tau_pct: float = Field(1.5, gt=0)
    # world units; None resolves to two voxel diagonals of the field in use
    z_tol: Optional[float] = Field(None, gt=0)
    max_rounds: int = Field(3, ge=1)
    seed: int = 0


@dataclass
class RoundStats:
    round: int
    prompts_added: int
    mean_area: float
    views_changed: int


@dataclass
class MaskSet:
    """Per-view, per-object masks with the prompts and boxes that produced them."""

    masks: dict[int, dict[int, np.ndarray]]
    prompts: dict[int, dict[int, list[PointPrompt]]] = field(default_factory=dict)
    boxes: dict[int, list[BoxProposal]] = field(default_factory=dict)
    iterations: int = 0
    history: list[RoundStats] = field(default_factory=list)

    def __post_init__(self):
        for view, per_object in self.masks.items():
            shapes = {m.shape for m in per_object.values()}
            if len(shapes) > 1:
                raise DimensionMismatch(f"view {view} holds masks of differing shapes {sorted(shapes)}")
            for q, mask in per_object.items():
                if mask.dtype != bool:
                    per_object[q] = np.asarray(mask, dtype=bool)

    @property
    def views(self) -> list[int]:
        return sorted(self.masks)

    def union(self, view: int) -> np.ndarray:
        from .masks import union_masks

        return union_masks(list(self.masks[view].values()))

    def unions(self) -> dict[int, np.ndarray]:
        return {view: self.union(view) for view in self.views}

    def mean_area(self) -> float:
        return float(np.mean([self.union(v).sum() for v in self.views])) if self.masks else 0.0

    def prompt_count(self, source: Optional[PromptSource] = None) -> int:
        return sum(
            1
            for per_object in self.prompts.values()
            for plist in per_object.values()
            for p in plist
            if source is None or p.source == source
        )

    def copy(self) -> "MaskSet":
        return MaskSet(
            masks={v: {q: m.copy() for q, m in per.items()} for v, per in self.masks.items()},
            prompts={v: {q: list(pl) for q, pl in per.items()} for v, per in self.prompts.items()},
            boxes={v: list(bl) for v, bl in self.boxes.items()},
            iterations=self.iterations,
            history=list(self.history),
        )

    def checksum(self) -> str:
        digest = hashlib.sha256()
        for view in self.views:
            for q in sorted(self.masks[view]):
                digest.update(f"{view}:{q}:".encode())
                digest.update(np.packbits(self.masks[view][q]).tobytes())
        return digest.hexdigest()
