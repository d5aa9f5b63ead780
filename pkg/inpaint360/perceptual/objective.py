"""Weighted assembly of the finetuning objective and gradient dispatch to the field."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, Field

from inpaint360.field.render import RaySampleBatch, backward_samples, composite
from .distance import PYRAMID_LEVELS
from .losses import inpaint_loss_patches, pixel_loss_patches


class LossConfig(BaseModel):
    lambda_geom: float = Field(0.01, ge=0)
    lambda_in: float = Field(0.1, ge=0)
    patch_size: int = Field(16, ge=1)
    pyramid_levels: int = Field(PYRAMID_LEVELS, ge=1)


@dataclass(frozen=True)
class LossBreakdown:
    total: float
    pixel: float
    inpaint: float
    geom: float

    def as_dict(self) -> dict[str, float]:
        return {"total": self.total, "pixel": self.pixel, "inpaint": self.inpaint, "geom": self.geom}


def combine_losses(geom: float, inpaint: float, pixel: float, cfg: LossConfig) -> LossBreakdown:
    total = cfg.lambda_geom * geom + cfg.lambda_in * inpaint + pixel
    return LossBreakdown(total=float(total), pixel=float(pixel), inpaint=float(inpaint), geom=float(geom))


@dataclass
class PatchBatch:
    """
    Rays for a stack of patches ready for rendering.

    ``samples`` holds ``N * size * size`` rays in patch-major, row-major
    order; ``inpainted[i]`` says whether patch i belongs to P_wi.
    """

    samples: RaySampleBatch
    targets: np.ndarray
    inpainted: np.ndarray
    size: int


def total_loss(field, batch: PatchBatch, cfg: LossConfig, geom_loss: float = 0.0) -> tuple[LossBreakdown, np.ndarray]:
    """
    Render the batch, score both patch groups and push the weighted colour
    gradient back into ``field``.

    ``geom_loss`` is the prior's unweighted value for this step; its gradients
    are accumulated by the prior itself. Returns the breakdown and the
    rendered patch stack.
    """
    n, size = batch.inpainted.shape[0], batch.size
    result = composite(batch.samples)
    rendered = result.rgb.reshape(n, size, size, 3)
    wo, wi = ~batch.inpainted, batch.inpainted

    l_pix, g_pix = pixel_loss_patches(rendered[wo], batch.targets[wo])
    l_in, g_in = inpaint_loss_patches(rendered[wi], batch.targets[wi], cfg.pyramid_levels)

    d_rgb = np.zeros_like(rendered)
    d_rgb[wo] = g_pix
    d_rgb[wi] = cfg.lambda_in * g_in
    backward_samples(batch.samples, d_rgb=d_rgb.reshape(-1, 3)).apply(field)
    return combine_losses(geom_loss, l_in, l_pix, cfg), rendered
