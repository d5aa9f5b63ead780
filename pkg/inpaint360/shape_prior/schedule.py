"""Linear-beta diffusion schedule and the closed-form forward process."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class NoiseSchedule:
    """Timesteps run ``1..steps``; index ``t`` of every array belongs to step ``t`` and index 0 is the clean state."""

    steps: int = 1000
    beta_start: float = 1e-4
    beta_end: float = 2e-2
    betas: np.ndarray = field(init=False, repr=False)
    alphas: np.ndarray = field(init=False, repr=False)
    alpha_bars: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.steps < 1 or not 0 < self.beta_start <= self.beta_end < 1:
            raise ValueError(f"invalid schedule steps={self.steps} betas=[{self.beta_start}, {self.beta_end}]")
        betas = np.concatenate([[0.0], np.linspace(self.beta_start, self.beta_end, self.steps)])
        alphas = 1.0 - betas
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "alpha_bars", np.cumprod(alphas))

    def alpha_bar(self, t) -> np.ndarray:
        t = np.asarray(t)
        if np.any((t < 0) | (t > self.steps)):
            raise ValueError(f"timestep outside [0, {self.steps}]")
        return self.alpha_bars[t]

    def to_document(self) -> dict:
        return {"steps": self.steps, "beta_start": self.beta_start, "beta_end": self.beta_end}


def _broadcast(values: np.ndarray, like: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    return values.reshape(values.shape + (1,) * (like.ndim - values.ndim))


def q_sample(x0: np.ndarray, t, eps: np.ndarray, schedule: NoiseSchedule) -> np.ndarray:
    """``sqrt(abar_t) x0 + sqrt(1 - abar_t) eps``; ``t`` is a scalar or one step per leading batch entry."""
    t = np.asarray(t)
    if np.any((t < 1) | (t > schedule.steps)):
        raise ValueError(f"q_sample needs t in [1, {schedule.steps}]")
    abar = _broadcast(schedule.alpha_bar(t), x0)
    return np.sqrt(abar) * x0 + np.sqrt(1.0 - abar) * eps


def predict_x0(x_t: np.ndarray, t, eps_pred: np.ndarray, schedule: NoiseSchedule) -> np.ndarray:
    """One-shot clean estimate ``(x_t - sqrt(1 - abar_t) eps) / sqrt(abar_t)``."""
    abar = _broadcast(schedule.alpha_bar(t), x_t)
    return (x_t - np.sqrt(1.0 - abar) * eps_pred) / np.sqrt(abar)
