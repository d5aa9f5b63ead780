"""
Dense voxel radiance field with explicit gradient buffers.

Grid nodes sit exactly on the aabb corners and are spaced ``extent / (G - 1)``
apart, so trilinear interpolation reproduces node values at nodes. Raw
parameters are interpolated first and activated afterwards:
``sigma = softplus(s)``, ``rgb = sigmoid(q)``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit

from inpaint360.errors import DimensionMismatch

# 8 corner offsets in (x, y, z) order; corner c uses bit 2 for x, bit 1 for y, bit 0 for z
_CORNERS = np.array([[(c >> 2) & 1, (c >> 1) & 1, c & 1] for c in range(8)], dtype=np.int64)


def softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def inverse_softplus(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    return y + np.log(-np.expm1(-y))


@dataclass
class TrilinearLookup:
    """Flat corner indices and weights for a set of query points, each (N, 8)."""

    corner_index: np.ndarray
    corner_weight: np.ndarray

    @property
    def size(self) -> int:
        return self.corner_index.shape[0]

    @staticmethod
    def concatenate(lookups: Sequence["TrilinearLookup"]) -> "TrilinearLookup":
        return TrilinearLookup(
            np.concatenate([lk.corner_index for lk in lookups], axis=0),
            np.concatenate([lk.corner_weight for lk in lookups], axis=0),
        )


def trilinear_lookup(points: np.ndarray, aabb_min: np.ndarray, aabb_max: np.ndarray, resolution: int) -> TrilinearLookup:
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    scale = (resolution - 1) / (aabb_max - aabb_min)
    grid = np.clip((points - aabb_min) * scale, 0.0, resolution - 1)
    base = np.minimum(np.floor(grid).astype(np.int64), resolution - 2)
    frac = grid - base

    corners = base[:, None, :] + _CORNERS[None, :, :]
    flat = (corners[..., 0] * resolution + corners[..., 1]) * resolution + corners[..., 2]
    w = np.where(_CORNERS[None, :, :] == 1, frac[:, None, :], 1.0 - frac[:, None, :])
    return TrilinearLookup(flat, np.prod(w, axis=-1))


class RadianceField:
    """Density and colour grids over an axis-aligned box, plus matching gradient buffers."""

    def __init__(
        self,
        resolution: int = 64,
        aabb: Sequence[Sequence[float]] = ((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0)),
        dtype=np.float32,
        init_density: float = -7.0,
        init_color: float = 0.0,
    ):
        if resolution < 2:
            raise DimensionMismatch(f"resolution must be at least 2, got {resolution}")
        self.resolution = int(resolution)
        self.aabb = np.array(aabb, dtype=np.float64).reshape(2, 3)
        if np.any(self.aabb[1] <= self.aabb[0]):
            raise DimensionMismatch(f"degenerate aabb {self.aabb.tolist()}")
        self.dtype = np.dtype(dtype)
        g = self.resolution
        self.density_param = np.full((g, g, g), init_density, dtype=self.dtype)
        self.color_param = np.full((g, g, g, 3), init_color, dtype=self.dtype)
        self.density_grad = np.zeros_like(self.density_param)
        self.color_grad = np.zeros_like(self.color_param)

    @property
    def aabb_min(self) -> np.ndarray:
        return self.aabb[0]

    @property
    def aabb_max(self) -> np.ndarray:
        return self.aabb[1]

    @property
    def voxel_size(self) -> np.ndarray:
        return (self.aabb_max - self.aabb_min) / (self.resolution - 1)

    @property
    def voxel_diagonal(self) -> float:
        return float(np.linalg.norm(self.voxel_size))

    @property
    def voxel_volume(self) -> float:
        return float(np.prod(self.voxel_size))

    def node_positions(self) -> np.ndarray:
        axes = [np.linspace(self.aabb_min[i], self.aabb_max[i], self.resolution) for i in range(3)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def contains(self, points: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        points = np.asarray(points)
        return np.all((points >= self.aabb_min - tol) & (points <= self.aabb_max + tol), axis=-1)

    def lookup(self, points: np.ndarray) -> TrilinearLookup:
        return trilinear_lookup(points, self.aabb_min, self.aabb_max, self.resolution)

    def interpolate(self, lookup: TrilinearLookup) -> tuple[np.ndarray, np.ndarray]:
        """Raw (pre-activation) density (N,) and colour (N, 3) at the looked-up points."""
        w = lookup.corner_weight
        raw_density = np.einsum("nc,nc->n", w, self.density_param.reshape(-1)[lookup.corner_index])
        raw_color = np.einsum("nc,nck->nk", w, self.color_param.reshape(-1, 3)[lookup.corner_index])
        return raw_density, raw_color

    def query(self, points: np.ndarray):
        """Return ``(sigma, rgb, raw_density, lookup)`` for world points of any leading shape."""
        points = np.asarray(points, dtype=np.float64)
        lead = points.shape[:-1]
        lookup = self.lookup(points)
        raw_density, raw_color = self.interpolate(lookup)
        sigma = softplus(raw_density).reshape(lead)
        rgb = expit(raw_color).reshape(lead + (3,))
        return sigma, rgb, raw_density.reshape(lead), lookup

    def density_at(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        raw_density, _ = self.interpolate(self.lookup(points))
        return softplus(raw_density).reshape(points.shape[:-1])

    def node_density(self) -> np.ndarray:
        return softplus(self.density_param.astype(np.float64))

    def accumulate_density_grad(self, lookup: TrilinearLookup, d_raw: np.ndarray) -> None:
        """Scatter gradients w.r.t. interpolated raw density back onto grid nodes."""
        contrib = lookup.corner_weight * np.asarray(d_raw).reshape(-1, 1)
        self.density_grad.reshape(-1)[:] += np.bincount(
            lookup.corner_index.ravel(), weights=contrib.ravel(), minlength=self.density_grad.size
        ).astype(self.dtype)

    def accumulate_color_grad(self, lookup: TrilinearLookup, d_raw: np.ndarray) -> None:
        d_raw = np.asarray(d_raw).reshape(-1, 3)
        flat_grad = self.color_grad.reshape(-1, 3)
        index = lookup.corner_index.ravel()
        for k in range(3):
            contrib = lookup.corner_weight * d_raw[:, k:k + 1]
            flat_grad[:, k] += np.bincount(index, weights=contrib.ravel(), minlength=flat_grad.shape[0]).astype(self.dtype)

    def zero_grad(self) -> None:
        self.density_grad.fill(0)
        self.color_grad.fill(0)

    def parameters(self) -> dict[str, np.ndarray]:
        return {"density": self.density_param, "color": self.color_param}

    def gradients(self) -> dict[str, np.ndarray]:
        return {"density": self.density_grad, "color": self.color_grad}

    def copy(self) -> "RadianceField":
        clone = RadianceField(self.resolution, self.aabb, dtype=self.dtype)
        clone.density_param[...] = self.density_param
        clone.color_param[...] = self.color_param
        return clone

    def checksum(self) -> str:
        digest = hashlib.sha256()
        digest.update(np.ascontiguousarray(self.density_param).tobytes())
        digest.update(np.ascontiguousarray(self.color_param).tobytes())
        return digest.hexdigest()

    def __repr__(self) -> str:
        return f"RadianceField(resolution={self.resolution}, aabb={self.aabb.tolist()}, dtype={self.dtype.name})"
