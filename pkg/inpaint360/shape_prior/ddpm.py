"""Denoiser training (noise-prediction objective) and deterministic reverse steps."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np
from opentelemetry import trace

from inpaint360.field.checkpoint import load_checkpoint, save_checkpoint
from inpaint360.field.optim import OptimizerState, optimizer_step
from inpaint360.inpaint360_logging import get_logger
from inpaint360.instrumentation.guards import NumericalGuard
from inpaint360.metrics.custom import ITERATIONS_TOTAL, LOSS
from .config import PriorConfig
from .denoiser import DenoiserNet
from .occupancy import OccupancyCube
from .schedule import NoiseSchedule, predict_x0, q_sample

logger = get_logger(__name__)
tracer = trace.get_tracer(__name__)

MIN_TRAINING_CUBES = 1000


@dataclass
class DdpmFit:
    net: DenoiserNet
    curve: list[tuple[int, float]] = dc_field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.curve[-1][1] if self.curve else float("nan")


def stack_cubes(cubes: Sequence[OccupancyCube]) -> np.ndarray:
    return np.stack([c.values for c in cubes]).astype(np.float32)


def train_ddpm(
    cubes: Sequence[OccupancyCube],
    net: DenoiserNet,
    schedule: NoiseSchedule,
    steps: int,
    cfg: Optional[PriorConfig] = None,
    workers: int = 1,
    stage: str = "prior-train",
    on_log: Optional[Callable[[int, float], None]] = None,
) -> DdpmFit:
    """
    Minimize the expected squared error between true and predicted noise.

    Each step draws its batch, timesteps and noise from ``(seed, step)`` and
    splits the batch into ``cfg.grad_shards`` slices whose gradients are summed
    in slice order, so the worker count never changes the result.
    """
    cfg = cfg or PriorConfig()
    if len(cubes) < MIN_TRAINING_CUBES:
        logger.warning("training the denoiser on only {} cubes (expected at least {})", len(cubes), MIN_TRAINING_CUBES)
    data = stack_cubes(cubes)
    state = OptimizerState(lr=cfg.lr)
    guard = NumericalGuard(stage)
    fit = DdpmFit(net=net)
    shards = max(1, min(cfg.grad_shards, cfg.batch_size))
    running = []

    logger.info(
        "training denoiser: {} cubes of {}^3, {} parameters, {} steps",
        len(cubes), data.shape[1], net.parameter_count, steps,
    )
    with tracer.start_as_current_span("prior.train_ddpm") as span, ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        if span.is_recording():
            span.set_attribute("prior.cubes", len(cubes))
            span.set_attribute("prior.steps", steps)
        for step in range(1, steps + 1):
            rng = np.random.default_rng([cfg.seed, step])
            index = rng.integers(0, data.shape[0], size=cfg.batch_size)
            t = rng.integers(1, schedule.steps + 1, size=cfg.batch_size)
            eps = rng.standard_normal(data[index].shape).astype(np.float32)
            x_t = q_sample(data[index], t, eps, schedule).astype(np.float32)
            normalizer = float(eps.size)
            slices = np.array_split(np.arange(cfg.batch_size), shards)
            results = list(pool.map(lambda s: net.loss_and_grads(x_t[s], t[s], eps[s], normalizer), slices))

            loss = 0.0
            net.zero_grad()
            for shard_loss, grads in results:
                loss += shard_loss
                for name, g in grads.items():
                    net.grads[name] += g
            guard.check(loss, step)
            optimizer_step(net, state)
            ITERATIONS_TOTAL.labels(stage=stage).inc()
            running.append(loss)
            if step % cfg.log_every == 0 or step == steps:
                mean_loss = float(np.mean(running))
                running.clear()
                fit.curve.append((step, mean_loss))
                LOSS.labels(stage=stage, component="ddpm").set(mean_loss)
                logger.info("step {}/{} noise mse {:.5f}", step, steps, mean_loss)
                if on_log is not None:
                    on_log(step, mean_loss)
    return fit


def estimate_clean(net: DenoiserNet, x_t: np.ndarray, t: int, schedule: NoiseSchedule) -> np.ndarray:
    """Single-shot clean estimate from a noised cube batch."""
    return predict_x0(x_t, t, net(x_t, t), schedule)


def ddim_denoise(
    net: DenoiserNet, x_t: np.ndarray, t_start: int, schedule: NoiseSchedule, steps: int = 50
) -> np.ndarray:
    """
    Deterministic strided reverse process from ``t_start`` down to the clean state.

    Used for reconstruction checks of held-out cubes, not for generation.
    """
    timesteps = np.unique(np.round(np.linspace(1, t_start, min(steps, t_start))).astype(int))[::-1]
    x = np.asarray(x_t, dtype=np.float64)
    for i, t in enumerate(timesteps):
        t_next = int(timesteps[i + 1]) if i + 1 < len(timesteps) else 0
        eps = net(x, int(t)).astype(np.float64)
        x0 = np.clip(predict_x0(x, int(t), eps, schedule), -1.0, 1.0)
        abar_next = schedule.alpha_bars[t_next]
        x = np.sqrt(abar_next) * x0 + np.sqrt(1.0 - abar_next) * eps
    return x


def occupancy_iou(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a) > 0
    b = np.asarray(b) > 0
    union = np.logical_or(a, b).sum()
    return 1.0 if union == 0 else float(np.logical_and(a, b).sum() / union)


def save_denoiser(net: DenoiserNet, path: Union[str, Path], schedule: Optional[NoiseSchedule] = None) -> Path:
    meta = {"base_channels": net.base_channels, "embed_dim": net.embed_dim}
    if schedule is not None:
        meta["schedule"] = schedule.to_document()
    return save_checkpoint(path, "denoiser", net.parameters(), meta=meta)


def load_denoiser(path: Union[str, Path]) -> tuple[DenoiserNet, NoiseSchedule]:
    header, arrays = load_checkpoint(path, "denoiser")
    meta = header["meta"]
    net = DenoiserNet(base_channels=meta["base_channels"], embed_dim=meta["embed_dim"])
    for name, value in arrays.items():
        net.params[name][...] = value
    schedule = NoiseSchedule(**meta["schedule"]) if "schedule" in meta else NoiseSchedule()
    return net, schedule
