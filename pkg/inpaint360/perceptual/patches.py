"""Non-overlapping patch tiling and the split into inpainted / untouched groups."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from inpaint360.errors import DimensionMismatch, PatchTooLarge


@dataclass(frozen=True, eq=False)
class PatchSet:
    """``anchors[i]`` is the (row, col) of patch i's top-left pixel; ``inpainted[i]`` marks P_wi membership."""

    size: int
    anchors: np.ndarray
    inpainted: np.ndarray
    image_shape: tuple[int, int]

    def __len__(self) -> int:
        return int(self.anchors.shape[0])

    @property
    def with_inpainted(self) -> np.ndarray:
        return self.anchors[self.inpainted]

    @property
    def without_inpainted(self) -> np.ndarray:
        return self.anchors[~self.inpainted]

    def pixel_index(self, anchors: Optional[np.ndarray] = None) -> tuple[np.ndarray, np.ndarray]:
        """Row and column index arrays shaped (N, size, size) for ``anchors`` (all patches by default)."""
        anchors = self.anchors if anchors is None else np.asarray(anchors).reshape(-1, 2)
        offsets = np.arange(self.size)
        rows = anchors[:, 0, None, None] + offsets[None, :, None]
        cols = anchors[:, 1, None, None] + offsets[None, None, :]
        return np.broadcast_to(rows, (len(anchors), self.size, self.size)), np.broadcast_to(cols, (len(anchors), self.size, self.size))


def partition_patches(mask: np.ndarray, size: int = 16, stride: Optional[int] = None) -> PatchSet:
    """Tile the image with ``size`` patches every ``stride`` pixels (default: ``size``) and split by ``mask``."""
    mask = np.asarray(mask, dtype=bool)
    height, width = mask.shape
    if size < 1 or size > height or size > width:
        raise PatchTooLarge(f"patch size {size} does not fit a {width}x{height} image")
    stride = stride or size
    rows = np.arange(0, height - size + 1, stride)
    cols = np.arange(0, width - size + 1, stride)
    anchors = np.stack(np.meshgrid(rows, cols, indexing="ij"), axis=-1).reshape(-1, 2)
    # summed-area table gives each patch's masked-pixel count
    table = np.pad(mask.astype(np.int64).cumsum(0).cumsum(1), ((1, 0), (1, 0)))
    r, c = anchors[:, 0], anchors[:, 1]
    counts = table[r + size, c + size] - table[r, c + size] - table[r + size, c] + table[r, c]
    return PatchSet(size=size, anchors=anchors, inpainted=counts > 0, image_shape=(height, width))


def extract_patches(image: np.ndarray, patches: PatchSet, anchors: Optional[np.ndarray] = None) -> np.ndarray:
    """Patch stack (N, size, size, C) gathered from ``image``; only pixels inside the patches are read."""
    if tuple(image.shape[:2]) != tuple(patches.image_shape):
        raise DimensionMismatch(f"image {image.shape[:2]} does not match patch layout {patches.image_shape}")
    rows, cols = patches.pixel_index(anchors)
    return image[rows, cols]


def scatter_patches(values: np.ndarray, patches: PatchSet, anchors: Optional[np.ndarray] = None) -> np.ndarray:
    """Add a patch stack back into an image-shaped array of zeros."""
    rows, cols = patches.pixel_index(anchors)
    out = np.zeros(tuple(patches.image_shape) + values.shape[3:], dtype=np.float64)
    np.add.at(out, (rows, cols), values)
    return out
