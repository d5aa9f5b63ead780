"""
A small 3D U-Net noise predictor with hand-written backward passes.

Layout for base width ``c`` (default 16) on an ``m**3`` cube::

    conv1  1 -> c     at m       + time embedding, relu
    pool
    conv2  c -> 2c    at m/2     + time embedding, relu
    pool
    conv3  2c -> 2c   at m/4     + time embedding, relu
    upsample, add conv2 output
    conv4  2c -> c    at m/2     + time embedding, relu
    upsample, add conv1 output
    conv5  c -> 1     at m

All convolutions are 3x3x3 with zero padding, computed as one matrix
product over the 27 shifted copies of the input.
"""

from __future__ import annotations

import itertools
from typing import Optional

import numpy as np

EMBED_DIM = 32
_OFFSETS = tuple(itertools.product(range(3), repeat=3))


def timestep_embedding(t: np.ndarray, dim: int = EMBED_DIM) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64).reshape(-1)
    half = dim // 2
    freqs = np.exp(-np.log(10000.0) * np.arange(half) / half)
    args = t[:, None] * freqs[None, :]
    return np.concatenate([np.sin(args), np.cos(args)], axis=-1)


def conv3d_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``x`` (B, C, D, H, W), ``weight`` (O, C*27). Returns the output and the column buffer for backward."""
    b, c, d, h, w = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1), (1, 1)))
    cols = np.stack([xp[:, :, i:i + d, j:j + h, k:k + w] for i, j, k in _OFFSETS], axis=2)
    cols = cols.reshape(b, c * 27, d * h * w)
    out = np.matmul(weight, cols) + bias[None, :, None]
    return out.reshape(b, -1, d, h, w), cols


def conv3d_backward(dout: np.ndarray, cols: np.ndarray, weight: np.ndarray, need_input_grad: bool = True):
    b, o, d, h, w = dout.shape
    dmat = dout.reshape(b, o, d * h * w)
    d_weight = np.matmul(dmat, cols.transpose(0, 2, 1)).sum(axis=0)
    d_bias = dmat.sum(axis=(0, 2))
    if not need_input_grad:
        return None, d_weight, d_bias
    c = weight.shape[1] // 27
    dcols = np.matmul(weight.T, dmat).reshape(b, c, 27, d, h, w)
    dxp = np.zeros((b, c, d + 2, h + 2, w + 2), dtype=dout.dtype)
    for n, (i, j, k) in enumerate(_OFFSETS):
        dxp[:, :, i:i + d, j:j + h, k:k + w] += dcols[:, :, n]
    return dxp[:, :, 1:-1, 1:-1, 1:-1], d_weight, d_bias


def avg_pool(x: np.ndarray) -> np.ndarray:
    b, c, d, h, w = x.shape
    return x.reshape(b, c, d // 2, 2, h // 2, 2, w // 2, 2).mean(axis=(3, 5, 7))


def avg_pool_backward(dout: np.ndarray) -> np.ndarray:
    return upsample(dout) / 8.0


def upsample(x: np.ndarray) -> np.ndarray:
    return x.repeat(2, axis=2).repeat(2, axis=3).repeat(2, axis=4)


def upsample_backward(dout: np.ndarray) -> np.ndarray:
    b, c, d, h, w = dout.shape
    return dout.reshape(b, c, d // 2, 2, h // 2, 2, w // 2, 2).sum(axis=(3, 5, 7))


class DenoiserNet:
    """Noise predictor over occupancy cubes; parameters and gradients are plain named arrays."""

    def __init__(self, base_channels: int = 16, seed: int = 0, dtype=np.float32, embed_dim: int = EMBED_DIM):
        self.base_channels = int(base_channels)
        self.embed_dim = int(embed_dim)
        self.dtype = np.dtype(dtype)
        c = self.base_channels
        self.stages = {1: (1, c), 2: (c, 2 * c), 3: (2 * c, 2 * c), 4: (2 * c, c), 5: (c, 1)}
        rng = np.random.default_rng(seed)
        self.params: dict[str, np.ndarray] = {}
        for index, (cin, cout) in self.stages.items():
            scale = np.sqrt(2.0 / (cin * 27))
            if index == 5:
                scale *= 0.1
            self.params[f"conv{index}.weight"] = (rng.standard_normal((cout, cin * 27)) * scale).astype(self.dtype)
            self.params[f"conv{index}.bias"] = np.zeros(cout, dtype=self.dtype)
            if index < 5:
                self.params[f"embed{index}.weight"] = (
                    rng.standard_normal((cout, self.embed_dim)) * np.sqrt(1.0 / self.embed_dim)
                ).astype(self.dtype)
                self.params[f"embed{index}.bias"] = np.zeros(cout, dtype=self.dtype)
        self.grads = {name: np.zeros_like(p) for name, p in self.params.items()}

    def parameters(self) -> dict[str, np.ndarray]:
        return self.params

    def gradients(self) -> dict[str, np.ndarray]:
        return self.grads

    def zero_grad(self) -> None:
        for g in self.grads.values():
            g.fill(0)

    @property
    def parameter_count(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    def _prepare(self, x: np.ndarray, t) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim == 4:
            x = x[:, None]
        if x.shape[1] != 1 or any(s % 4 for s in x.shape[2:]):
            raise ValueError(f"expected (B, m, m, m) cubes with m divisible by 4, got {x.shape}")
        t = np.broadcast_to(np.asarray(t), (x.shape[0],))
        return x, timestep_embedding(t, self.embed_dim).astype(self.dtype)

    def _embed(self, index: int, emb: np.ndarray) -> np.ndarray:
        e = emb @ self.params[f"embed{index}.weight"].T + self.params[f"embed{index}.bias"]
        return e[:, :, None, None, None]

    def _forward(self, x: np.ndarray, emb: np.ndarray):
        p = self.params
        cache = {}
        h1pre, cache["cols1"] = conv3d_forward(x, p["conv1.weight"], p["conv1.bias"])
        h1pre = h1pre + self._embed(1, emb)
        h1 = np.maximum(h1pre, 0)
        h2pre, cache["cols2"] = conv3d_forward(avg_pool(h1), p["conv2.weight"], p["conv2.bias"])
        h2pre = h2pre + self._embed(2, emb)
        h2 = np.maximum(h2pre, 0)
        h3pre, cache["cols3"] = conv3d_forward(avg_pool(h2), p["conv3.weight"], p["conv3.bias"])
        h3pre = h3pre + self._embed(3, emb)
        h3 = np.maximum(h3pre, 0)
        h4pre, cache["cols4"] = conv3d_forward(upsample(h3) + h2, p["conv4.weight"], p["conv4.bias"])
        h4pre = h4pre + self._embed(4, emb)
        h4 = np.maximum(h4pre, 0)
        out, cache["cols5"] = conv3d_forward(upsample(h4) + h1, p["conv5.weight"], p["conv5.bias"])
        cache.update(h1pre=h1pre, h2pre=h2pre, h3pre=h3pre, h4pre=h4pre, emb=emb)
        return out, cache

    def _backward(self, dout: np.ndarray, cache: dict) -> dict[str, np.ndarray]:
        p = self.params
        grads = {}
        emb = cache["emb"]

        def stage_back(index: int, dpre: np.ndarray, need_input: bool = True):
            d_e = dpre.sum(axis=(2, 3, 4))
            grads[f"embed{index}.weight"] = d_e.T @ emb
            grads[f"embed{index}.bias"] = d_e.sum(axis=0)
            dx, grads[f"conv{index}.weight"], grads[f"conv{index}.bias"] = conv3d_backward(
                dpre, cache[f"cols{index}"], p[f"conv{index}.weight"], need_input
            )
            return dx

        du2, grads["conv5.weight"], grads["conv5.bias"] = conv3d_backward(dout, cache["cols5"], p["conv5.weight"])
        dh1 = du2
        dh4 = upsample_backward(du2)
        du1 = stage_back(4, dh4 * (cache["h4pre"] > 0))
        dh2 = du1
        dh3 = upsample_backward(du1)
        dp2 = stage_back(3, dh3 * (cache["h3pre"] > 0))
        dh2 = dh2 + avg_pool_backward(dp2)
        dp1 = stage_back(2, dh2 * (cache["h2pre"] > 0))
        dh1 = dh1 + avg_pool_backward(dp1)
        stage_back(1, dh1 * (cache["h1pre"] > 0), need_input=False)
        return {name: g.astype(self.dtype, copy=False) for name, g in grads.items()}

    def __call__(self, x: np.ndarray, t, chunk: int = 32) -> np.ndarray:
        """Predicted noise for cubes ``x`` shaped (B, m, m, m) at timesteps ``t``."""
        x, emb = self._prepare(x, t)
        outputs = [self._forward(x[i:i + chunk], emb[i:i + chunk])[0] for i in range(0, x.shape[0], chunk)]
        return np.concatenate(outputs)[:, 0]

    def loss_and_grads(
        self, x_t: np.ndarray, t, eps: np.ndarray, normalizer: Optional[float] = None
    ) -> tuple[float, dict[str, np.ndarray]]:
        """
        Squared-error noise loss ``sum((eps_pred - eps)**2) / normalizer`` and its
        parameter gradients. Reads parameters only, so shards may run concurrently.
        """
        x, emb = self._prepare(x_t, t)
        eps = np.asarray(eps, dtype=self.dtype).reshape(x.shape)
        normalizer = float(eps.size if normalizer is None else normalizer)
        pred, cache = self._forward(x, emb)
        err = pred - eps
        loss = float(np.sum(err.astype(np.float64) ** 2) / normalizer)
        return loss, self._backward((2.0 / normalizer) * err, cache)
