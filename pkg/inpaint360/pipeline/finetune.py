"""
Patch-based finetuning of the retrained field, one run per ablation variant.

Every variant starts from the same retrained field and draws the same
patches and ray jitter (both come from ``(seed, iteration)``), so the
variants differ only in which loss terms are switched on.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Mapping, Optional

import numpy as np
from opentelemetry import trace

from inpaint360.errors import DimensionMismatch
from inpaint360.field.grid import RadianceField
from inpaint360.field.optim import OptimizerState, optimizer_step
from inpaint360.field.render import sample_rays
from inpaint360.geometry.camera import Camera, pixels_to_rays
from inpaint360.inpaint360_logging import get_logger
from inpaint360.instrumentation.guards import NumericalGuard
from inpaint360.metrics.custom import ITERATIONS_TOTAL, LOSS
from inpaint360.perceptual.objective import LossBreakdown, LossConfig, PatchBatch, total_loss
from inpaint360.perceptual.patches import PatchSet, partition_patches
from inpaint360.shape_prior.config import PriorConfig
from inpaint360.shape_prior.denoiser import DenoiserNet
from inpaint360.shape_prior.dsds import geom_loss_on_cubes, visible_cube_centers
from inpaint360.shape_prior.schedule import NoiseSchedule
from .config import FinetuneConfig

logger = get_logger(__name__)
tracer = trace.get_tracer(__name__)


@dataclass
class PatchPool:
    """Every patch of every view, split into the inpainted and untouched groups."""

    views: np.ndarray        # (N,)
    anchors: np.ndarray      # (N, 2)
    inpainted: np.ndarray    # (N,) bool
    size: int

    @property
    def inpainted_index(self) -> np.ndarray:
        return np.flatnonzero(self.inpainted)

    @property
    def untouched_index(self) -> np.ndarray:
        return np.flatnonzero(~self.inpainted)


def build_patch_pool(masks: Mapping[int, np.ndarray], size: int) -> PatchPool:
    views, anchors, inpainted = [], [], []
    for view in sorted(masks):
        patches: PatchSet = partition_patches(masks[view], size)
        views.append(np.full(len(patches), view, dtype=np.int64))
        anchors.append(patches.anchors)
        inpainted.append(patches.inpainted)
    if not views:
        raise DimensionMismatch("no views to draw patches from")
    return PatchPool(np.concatenate(views), np.concatenate(anchors), np.concatenate(inpainted), size)


def draw_patches(pool: PatchPool, count: int, inpainted_share: float, rng: np.random.Generator) -> np.ndarray:
    """Indices into ``pool``: ``round(count * share)`` inpainted patches, the rest untouched."""
    wi, wo = pool.inpainted_index, pool.untouched_index
    n_wi = int(round(count * inpainted_share)) if wi.size else 0
    n_wo = count - n_wi if wo.size else 0
    if wo.size == 0:
        n_wi = count
    picked = []
    if n_wi:
        picked.append(wi[rng.integers(0, wi.size, size=n_wi)])
    if n_wo:
        picked.append(wo[rng.integers(0, wo.size, size=n_wo)])
    return np.concatenate(picked)


def patch_batch(
    field: RadianceField,
    pool: PatchPool,
    index: np.ndarray,
    images: Mapping[int, np.ndarray],
    cameras: Mapping[int, Camera],
    num_samples: int,
    rng: np.random.Generator,
) -> PatchBatch:
    size = pool.size
    offsets = np.arange(size)
    origins, directions, targets = [], [], []
    for i in index:
        view = int(pool.views[i])
        row0, col0 = pool.anchors[i]
        rows, cols = np.meshgrid(row0 + offsets, col0 + offsets, indexing="ij")
        o, d = pixels_to_rays(cameras[view], cols + 0.5, rows + 0.5)
        origins.append(o.reshape(-1, 3))
        directions.append(d.reshape(-1, 3))
        targets.append(images[view][rows, cols])
    samples = sample_rays(field, np.concatenate(origins), np.concatenate(directions), num_samples, rng)
    return PatchBatch(samples=samples, targets=np.stack(targets).astype(np.float64), inpainted=pool.inpainted[index], size=size)


@dataclass
class FinetuneFit:
    variant: str
    field: RadianceField
    curve: list[dict] = dc_field(default_factory=list)


def finetune_field(
    variant: str,
    init: RadianceField,
    images: Mapping[int, np.ndarray],
    masks: Mapping[int, np.ndarray],
    cameras: Mapping[int, Camera],
    depths: Mapping[int, np.ndarray],
    net: DenoiserNet,
    schedule: NoiseSchedule,
    finetune_cfg: FinetuneConfig,
    loss_cfg: LossConfig,
    prior_cfg: PriorConfig,
    seed: int = 0,
    stage: str = "finetune",
    on_log: Optional[Callable[[int, LossBreakdown], None]] = None,
) -> FinetuneFit:
    """
    Optimize a copy of ``init`` under the variant's loss weights.

    ``images`` are the inpainted training images, ``masks`` the refined
    removal masks that define the patch groups and ``depths`` z-depth maps
    of ``init`` used to place the prior's cubes.
    """
    weights = finetune_cfg.weights(variant, loss_cfg)
    field = init.copy()
    state = OptimizerState(lr=finetune_cfg.lr)
    guard = NumericalGuard(stage)
    pool = build_patch_pool(masks, weights.patch_size)
    fit = FinetuneFit(variant=variant, field=field)

    centers = np.zeros((0, 3))
    if weights.lambda_geom > 0:
        centers = visible_cube_centers(field, masks, cameras, depths, prior_cfg)
        logger.info("variant {}: {} cubes inside the removal region", variant, centers.shape[0])

    running: list[LossBreakdown] = []
    with tracer.start_as_current_span(f"finetune.{variant}") as span:
        if span.is_recording():
            span.set_attribute("finetune.iterations", finetune_cfg.iterations)
            span.set_attribute("finetune.lambda_in", weights.lambda_in)
            span.set_attribute("finetune.lambda_geom", weights.lambda_geom)
        for iteration in range(1, finetune_cfg.iterations + 1):
            rng = np.random.default_rng([seed, iteration])
            index = draw_patches(pool, finetune_cfg.patches_per_step, finetune_cfg.inpainted_share, rng)
            batch = patch_batch(field, pool, index, images, cameras, finetune_cfg.num_samples, rng)

            geom = 0.0
            prior_rng = np.random.default_rng([seed, iteration, 1])
            if centers.shape[0] and iteration % finetune_cfg.geom_every == 0:
                step_centers = centers
                if centers.shape[0] > prior_cfg.cubes_per_step:
                    pick = np.sort(prior_rng.choice(centers.shape[0], size=prior_cfg.cubes_per_step, replace=False))
                    step_centers = centers[pick]
                geom = geom_loss_on_cubes(field, step_centers, net, schedule, prior_cfg, prior_rng, weights.lambda_geom).loss

            breakdown, _ = total_loss(field, batch, weights, geom)
            guard.check(breakdown.total, iteration)
            optimizer_step(field, state)
            ITERATIONS_TOTAL.labels(stage=stage).inc()
            running.append(breakdown)

            if iteration % finetune_cfg.log_every == 0 or iteration == finetune_cfg.iterations:
                mean = {k: float(np.mean([b.as_dict()[k] for b in running])) for k in ("total", "pixel", "inpaint", "geom")}
                running.clear()
                fit.curve.append({"iteration": iteration, **mean})
                for component, value in mean.items():
                    LOSS.labels(stage=f"{stage}.{variant}", component=component).set(value)
                logger.info(
                    "variant {} iteration {}/{} total {:.5f} pix {:.5f} in {:.5f} geom {:.5f}",
                    variant, iteration, finetune_cfg.iterations,
                    mean["total"], mean["pixel"], mean["inpaint"], mean["geom"],
                )
                if on_log is not None:
                    on_log(iteration, LossBreakdown(**mean))
    return fit
