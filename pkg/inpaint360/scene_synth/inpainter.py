"""
Stand-in for a 2D diffusion inpainter.

Inside the mask the output is the empty-scene ground truth plus two
view-specific disturbances: a low-frequency colour offset and correlated
blob noise built from eight random-phase cosines. Outside the mask the
source pixels pass through untouched.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np
from pydantic import BaseModel, Field

from inpaint360.errors import DimensionMismatch
from .raytrace import SyntheticDataset

NUM_BLOB_WAVES = 8


class InpainterPerturbation(BaseModel):
    color_shift: float = Field(0.1, ge=0)
    blob_noise: float = Field(0.05, ge=0)
    # pixels per blob wavelength
    correlation_length: float = Field(12.0, gt=0)
    seed: int = 0


def color_offset(shape: tuple[int, int], amplitude: float, rng: np.random.Generator) -> np.ndarray:
    """A per-view RGB shift whose strength ramps smoothly across the image."""
    height, width = shape
    shift = rng.uniform(-amplitude, amplitude, size=3)
    theta, phase = rng.uniform(0.0, 2.0 * np.pi, size=2)
    y, x = np.mgrid[0:height, 0:width]
    ramp = 1.0 + 0.5 * np.cos(2.0 * np.pi * (x * np.cos(theta) + y * np.sin(theta)) / max(height, width) + phase)
    return ramp[..., None] * shift


def blob_field(shape: tuple[int, int], amplitude: float, correlation_length: float, rng: np.random.Generator) -> np.ndarray:
    height, width = shape
    y, x = np.mgrid[0:height, 0:width]
    angles = rng.uniform(0.0, 2.0 * np.pi, size=NUM_BLOB_WAVES)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=NUM_BLOB_WAVES)
    tint = rng.uniform(0.5, 1.5, size=3)
    k = 2.0 * np.pi / correlation_length
    waves = np.cos(
        k * (x[..., None] * np.cos(angles) + y[..., None] * np.sin(angles)) + phases
    ).sum(axis=-1)
    # eight unit cosines with independent phases have standard deviation 2
    return (0.5 * amplitude * waves)[..., None] * tint


def inpaint_view(
    source: np.ndarray,
    empty: np.ndarray,
    mask: np.ndarray,
    perturbation: InpainterPerturbation,
    view: int,
) -> np.ndarray:
    if source.shape != empty.shape or source.shape[:2] != mask.shape:
        raise DimensionMismatch(
            f"view {view}: image {source.shape}, empty {empty.shape} and mask {mask.shape} disagree"
        )
    rng = np.random.default_rng([perturbation.seed, view])
    fill = empty + color_offset(mask.shape, perturbation.color_shift, rng)
    fill = fill + blob_field(mask.shape, perturbation.blob_noise, perturbation.correlation_length, rng)
    out = source.copy()
    out[mask] = np.clip(fill[mask], 0.0, 1.0)
    return out


def simulate_inpainting(
    dataset: SyntheticDataset,
    masks: Mapping[int, np.ndarray],
    perturbation: InpainterPerturbation = None,
    images: Mapping[int, np.ndarray] = None,
) -> dict[int, np.ndarray]:
    """
    Inpaint every masked view of ``dataset``.

    ``images`` overrides the source images (e.g. as re-read from disk);
    views without a mask are returned unchanged.
    """
    perturbation = perturbation or InpainterPerturbation()
    images = images if images is not None else dataset.images()
    extra = set(masks) - set(dataset.views)
    if extra:
        raise DimensionMismatch(f"masks given for unknown views {sorted(extra)}")
    out = {}
    for view in dataset.view_indices:
        source = np.asarray(images[view], dtype=np.float64)
        if view not in masks:
            out[view] = source.copy()
            continue
        out[view] = inpaint_view(source, dataset.views[view].empty_rgb, np.asarray(masks[view], dtype=bool), perturbation, view)
    return out
