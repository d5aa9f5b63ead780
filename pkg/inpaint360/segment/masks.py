from typing import Sequence

import numpy as np

from inpaint360.errors import DimensionMismatch


def union_masks(masks: Sequence[np.ndarray]) -> np.ndarray:
    """Pixelwise OR of per-object masks of one view."""
    if not masks:
        raise DimensionMismatch("union of zero masks has no shape")
    shape = masks[0].shape
    out = np.zeros(shape, dtype=bool)
    for mask in masks:
        if mask.shape != shape:
            raise DimensionMismatch(f"mask shape {mask.shape} differs from {shape}")
        out |= np.asarray(mask, dtype=bool)
    return out


def mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union; two empty masks agree perfectly."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"mask shapes {a.shape} and {b.shape} differ")
    union = np.logical_or(a, b).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(a, b).sum() / union)
