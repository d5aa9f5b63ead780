"""Adaptive-moment optimizer shared by the radiance field and the denoiser."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Protocol

import numpy as np


class Optimizable(Protocol):
    def parameters(self) -> dict[str, np.ndarray]: ...

    def gradients(self) -> dict[str, np.ndarray]: ...

    def zero_grad(self) -> None: ...


@dataclass
class OptimizerState:
    lr: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    lr_scale: dict[str, float] = field(default_factory=dict)
    first: dict[str, np.ndarray] = field(default_factory=dict)
    second: dict[str, np.ndarray] = field(default_factory=dict)

    def moments_finite(self) -> bool:
        return all(np.all(np.isfinite(m)) for m in (*self.first.values(), *self.second.values()))


def adam_update(params: Mapping[str, np.ndarray], grads: Mapping[str, np.ndarray], state: OptimizerState) -> None:
    """In-place Adam update with bias correction. Parameters whose gradient is all zero keep their moments decaying."""
    state.step += 1
    bias1 = 1.0 - state.beta1 ** state.step
    bias2 = 1.0 - state.beta2 ** state.step
    for name, param in params.items():
        grad = grads[name].astype(np.float64, copy=False)
        if name not in state.first:
            state.first[name] = np.zeros(param.shape, dtype=np.float64)
            state.second[name] = np.zeros(param.shape, dtype=np.float64)
        m = state.first[name]
        v = state.second[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * grad * grad
        lr = state.lr * state.lr_scale.get(name, 1.0)
        update = lr * (m / bias1) / (np.sqrt(v / bias2) + state.eps)
        param -= update.astype(param.dtype, copy=False)


def optimizer_step(model: Optimizable, state: OptimizerState) -> None:
    """Apply one Adam step to ``model`` and zero its gradient buffers."""
    adam_update(model.parameters(), model.gradients(), state)
    model.zero_grad()
