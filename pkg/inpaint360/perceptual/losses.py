from __future__ import annotations

import numpy as np

from .distance import PYRAMID_LEVELS, perceptual_distances_and_grad
from .patches import PatchSet, extract_patches, scatter_patches


def pixel_loss_patches(rendered: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """
    Mean per-pixel L1 colour error over a patch stack (N, size, size, C).

    The L1 norm sums over channels and the mean runs over pixels, so a
    uniform 0.5 error on three channels costs 1.5. Ties get a zero subgradient.
    """
    rendered = np.asarray(rendered, dtype=np.float64)
    if rendered.shape[0] == 0:
        return 0.0, np.zeros_like(rendered)
    diff = rendered - np.asarray(target, dtype=np.float64)
    pixels = rendered.shape[0] * rendered.shape[1] * rendered.shape[2]
    return float(np.abs(diff).sum() / pixels), np.sign(diff) / pixels


def pixel_loss(rendered: np.ndarray, target: np.ndarray, patches: PatchSet) -> tuple[float, np.ndarray]:
    """Pixel loss over the patches without inpainted pixels; gradient is image-shaped and zero elsewhere."""
    anchors = patches.without_inpainted
    loss, grad = pixel_loss_patches(
        extract_patches(rendered, patches, anchors), extract_patches(target, patches, anchors)
    )
    return loss, scatter_patches(grad, patches, anchors)


def inpaint_loss_patches(rendered: np.ndarray, target: np.ndarray, levels: int = PYRAMID_LEVELS) -> tuple[float, np.ndarray]:
    """Mean perceptual distance over a patch stack and its gradient with respect to ``rendered``."""
    rendered = np.asarray(rendered, dtype=np.float64)
    if rendered.shape[0] == 0:
        return 0.0, np.zeros_like(rendered)
    dist, grad = perceptual_distances_and_grad(rendered, target, levels)
    count = rendered.shape[0]
    return float(dist.sum() / count), grad / count


def inpaint_loss(
    rendered: np.ndarray, target: np.ndarray, patches: PatchSet, levels: int = PYRAMID_LEVELS
) -> tuple[float, np.ndarray]:
    """Perceptual loss over the patches that contain inpainted pixels; image-shaped gradient."""
    anchors = patches.with_inpainted
    loss, grad = inpaint_loss_patches(
        extract_patches(rendered, patches, anchors), extract_patches(target, patches, anchors), levels
    )
    return loss, scatter_patches(grad, patches, anchors)
