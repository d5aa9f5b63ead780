"""Photometric fitting of a radiance field to posed images."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import Callable, Mapping, Optional

import numpy as np
from opentelemetry import trace
from pydantic import BaseModel, Field, field_validator

from inpaint360.errors import DimensionMismatch
from inpaint360.geometry.camera import Camera, camera_rays
from inpaint360.inpaint360_logging import get_logger
from inpaint360.instrumentation.guards import NumericalGuard
from inpaint360.metrics.custom import ITERATIONS_TOTAL, LOSS
from .grid import RadianceField
from .optim import OptimizerState, optimizer_step
from .render import SampleGradients, backward_samples, composite, sample_rays

logger = get_logger(__name__)
tracer = trace.get_tracer(__name__)

AABB = tuple[tuple[float, float, float], tuple[float, float, float]]


class FieldConfig(BaseModel):
    resolution: int = Field(64, ge=2)
    aabb: AABB = ((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0))
    iterations: int = Field(15000, ge=0)
    batch_rays: int = Field(1024, ge=1)
    num_samples: int = Field(192, ge=1)
    lr: float = Field(0.1, gt=0)
    color_lr_scale: float = Field(1.0, gt=0)
    init_density: float = -7.0
    # fixed shard count keeps results independent of the worker count
    grad_shards: int = Field(4, ge=1)
    log_every: int = Field(500, ge=1)
    seed: int = 0

    @field_validator("aabb")
    @classmethod
    def _aabb_ordered(cls, value: AABB) -> AABB:
        if any(hi <= lo for lo, hi in zip(value[0], value[1])):
            raise ValueError(f"aabb max must exceed min on every axis, got {value}")
        return value

    def new_field(self) -> RadianceField:
        return RadianceField(self.resolution, self.aabb, init_density=self.init_density)

    def optimizer(self) -> OptimizerState:
        return OptimizerState(lr=self.lr, lr_scale={"color": self.color_lr_scale})


@dataclass
class RayPool:
    """Every supervised pixel of every view, flattened."""

    origins: np.ndarray
    directions: np.ndarray
    targets: np.ndarray
    view_index: np.ndarray

    @property
    def size(self) -> int:
        return self.origins.shape[0]


def build_ray_pool(
    images: Mapping[int, np.ndarray],
    cameras: Mapping[int, Camera],
    exclude_masks: Optional[Mapping[int, np.ndarray]] = None,
) -> RayPool:
    """Gather rays and target colours; pixels set in ``exclude_masks`` are left out."""
    origins, directions, targets, views = [], [], [], []
    for index in sorted(images):
        if index not in cameras:
            raise DimensionMismatch(f"view {index} has an image but no camera")
        cam = cameras[index]
        image = np.asarray(images[index])
        if image.shape != (cam.height, cam.width, 3):
            raise DimensionMismatch(
                f"view {index}: image shape {image.shape} != camera {(cam.height, cam.width, 3)}"
            )
        keep = np.ones((cam.height, cam.width), dtype=bool)
        if exclude_masks is not None and index in exclude_masks:
            mask = np.asarray(exclude_masks[index])
            if mask.shape != keep.shape:
                raise DimensionMismatch(f"view {index}: mask shape {mask.shape} != image {keep.shape}")
            keep &= ~mask.astype(bool)
        o, d = camera_rays(cam)
        origins.append(o[keep])
        directions.append(d[keep])
        targets.append(image[keep].astype(np.float64))
        views.append(np.full(int(keep.sum()), index, dtype=np.int64))
    if not origins:
        raise DimensionMismatch("no training views supplied")
    return RayPool(np.concatenate(origins), np.concatenate(directions), np.concatenate(targets), np.concatenate(views))


def l1_ray_loss(rendered: np.ndarray, target: np.ndarray, normalizer: float) -> tuple[float, np.ndarray]:
    """Sum over channels of |rendered - target|, divided by ``normalizer``; subgradient 0 at ties."""
    diff = rendered - target
    return float(np.abs(diff).sum() / normalizer), np.sign(diff) / normalizer


def _shard_step(field: RadianceField, pool: RayPool, index: np.ndarray, num_samples: int, seed: int, normalizer: float):
    rng = np.random.default_rng(seed)
    batch = sample_rays(field, pool.origins[index], pool.directions[index], num_samples, rng)
    result = composite(batch)
    loss, d_rgb = l1_ray_loss(result.rgb, pool.targets[index], normalizer)
    return loss, backward_samples(batch, d_rgb=d_rgb)


@dataclass
class FieldFit:
    field: RadianceField
    curve: list[tuple[int, float]] = dc_field(default_factory=list)


def run_sharded(field: RadianceField, pool: RayPool, index: np.ndarray, config: FieldConfig,
                shard_seeds: np.ndarray, executor: Optional[ThreadPoolExecutor], normalizer: float):
    """Render and differentiate ``index`` in a fixed number of shards, reduced in shard order."""
    parts = np.array_split(index, config.grad_shards)
    args = [(field, pool, part, config.num_samples, int(seed), normalizer) for part, seed in zip(parts, shard_seeds)]
    if executor is None:
        results = [_shard_step(*a) for a in args]
    else:
        results = list(executor.map(lambda a: _shard_step(*a), args))
    loss = sum(r[0] for r in results)
    return loss, SampleGradients.concatenate([r[1] for r in results])


def fit_field(
    images: Mapping[int, np.ndarray],
    masks: Optional[Mapping[int, np.ndarray]],
    cameras: Mapping[int, Camera],
    config: FieldConfig,
    *,
    init: Optional[RadianceField] = None,
    workers: int = 1,
    stage: str = "train",
    on_log: Optional[Callable[[int, float], None]] = None,
) -> FieldFit:
    """
    Minimize the mean per-pixel L1 (summed over channels) over randomly drawn rays.

    With ``masks`` given, masked pixels are not supervised. The run is a pure
    function of (inputs, config); ``workers`` only changes wall-clock time.
    """
    pool = build_ray_pool(images, cameras, masks)
    field = init.copy() if init is not None else config.new_field()
    state = config.optimizer()
    guard = NumericalGuard(stage)
    rng = np.random.default_rng(config.seed)
    fit = FieldFit(field)

    logger.info(
        "fitting field: {} views, {} rays, {} iterations, grid {}^3",
        len(images), pool.size, config.iterations, field.resolution,
    )
    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        with tracer.start_as_current_span("field.train") as span:
            span.set_attribute("field.iterations", config.iterations)
            span.set_attribute("field.rays", pool.size)
            running = 0.0
            for iteration in range(1, config.iterations + 1):
                index = rng.integers(0, pool.size, size=config.batch_rays)
                shard_seeds = rng.integers(0, 2**62, size=config.grad_shards)
                loss, grads = run_sharded(field, pool, index, config, shard_seeds, executor, float(config.batch_rays))
                guard.check(loss, iteration)
                grads.apply(field)
                optimizer_step(field, state)
                ITERATIONS_TOTAL.labels(stage=stage).inc()
                running += loss
                if iteration % config.log_every == 0 or iteration == config.iterations:
                    window = (iteration - 1) % config.log_every + 1
                    mean_loss = running / window
                    running = 0.0
                    fit.curve.append((iteration, mean_loss))
                    LOSS.labels(stage=stage, component="pix").set(mean_loss)
                    logger.info("iteration {}/{} l1 {:.5f}", iteration, config.iterations, mean_loss)
                    if on_log is not None:
                        on_log(iteration, mean_loss)
    finally:
        if executor is not None:
            executor.shutdown()
    return fit


def train_field(
    images: Mapping[int, np.ndarray],
    masks: Optional[Mapping[int, np.ndarray]],
    cameras: Mapping[int, Camera],
    config: FieldConfig,
    **kwargs,
) -> RadianceField:
    return fit_field(images, masks, cameras, config, **kwargs).field
