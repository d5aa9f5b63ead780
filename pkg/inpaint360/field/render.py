"""
Ray sampling, front-to-back compositing and its explicit backward pass.

Naming follows the compositing equation the package implements: per sample,
``opacity`` T_i = 1 - exp(-sigma_i * delta_i) and ``transmittance``
alpha_i = prod_{j<i} exp(-sigma_j * delta_j); the weight is alpha_i * T_i.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit

from inpaint360.errors import NoIntersection
from inpaint360.geometry.camera import Camera, Ray, camera_rays
from .grid import RadianceField, TrilinearLookup, softplus

DEFAULT_SAMPLES = 192


@dataclass
class RaySampleBatch:
    """Samples for R rays, K per ray. Compositing fills ``opacity`` and ``transmittance``."""

    t: np.ndarray                 # (R, K) strictly increasing per ray
    delta: np.ndarray             # (R, K) segment lengths, first measured from t_near
    t_near: np.ndarray            # (R,)
    hit: np.ndarray               # (R,) rays that cross the aabb
    sigma: np.ndarray             # (R, K)
    rgb: np.ndarray               # (R, K, 3)
    raw_density: Optional[np.ndarray] = None   # (R, K) pre-softplus
    positions: Optional[np.ndarray] = None     # (R, K, 3)
    lookup: Optional[TrilinearLookup] = None   # R*K entries
    opacity: Optional[np.ndarray] = None
    transmittance: Optional[np.ndarray] = None

    @property
    def num_rays(self) -> int:
        return self.t.shape[0]

    @property
    def num_samples(self) -> int:
        return self.t.shape[1]

    @classmethod
    def from_arrays(cls, t, sigma, rgb, t_near) -> "RaySampleBatch":
        """Build a batch from explicit samples (no field behind it); used to check compositing in isolation."""
        t = np.atleast_2d(np.asarray(t, dtype=np.float64))
        sigma = np.atleast_2d(np.asarray(sigma, dtype=np.float64))
        rgb = np.asarray(rgb, dtype=np.float64).reshape(t.shape + (3,))
        t_near = np.atleast_1d(np.asarray(t_near, dtype=np.float64))
        delta = np.diff(np.concatenate([t_near[:, None], t], axis=1), axis=1)
        return cls(t=t, delta=delta, t_near=t_near, hit=np.ones(t.shape[0], dtype=bool), sigma=sigma, rgb=rgb)


@dataclass
class RenderResult:
    rgb: np.ndarray           # (R, 3)
    depth: np.ndarray         # (R,) ray-parameter depth, D = sum w t
    accumulation: np.ndarray  # (R,)
    weights: np.ndarray       # (R, K)


@dataclass
class SampleGradients:
    """Gradients w.r.t. interpolated raw parameters, ready to scatter onto the grid."""

    lookup: TrilinearLookup
    d_raw_density: np.ndarray   # (N,)
    d_raw_color: np.ndarray     # (N, 3)

    @staticmethod
    def concatenate(parts: list["SampleGradients"]) -> "SampleGradients":
        return SampleGradients(
            TrilinearLookup.concatenate([p.lookup for p in parts]),
            np.concatenate([p.d_raw_density for p in parts]),
            np.concatenate([p.d_raw_color for p in parts]),
        )

    def apply(self, field: RadianceField) -> None:
        field.accumulate_density_grad(self.lookup, self.d_raw_density)
        field.accumulate_color_grad(self.lookup, self.d_raw_color)


def intersect_aabb(origins: np.ndarray, directions: np.ndarray, aabb: np.ndarray):
    """
    Slab test. Returns ``(t_near, t_far, hit)``; ``t_near`` is clamped to 0 for
    rays starting inside. Misses get ``t_near = t_far = 0`` so every depth is finite.
    """
    origins = np.asarray(origins, dtype=np.float64).reshape(-1, 3)
    directions = np.asarray(directions, dtype=np.float64).reshape(-1, 3)
    parallel = directions == 0.0
    safe = np.where(parallel, 1.0, directions)
    t0 = (aabb[0] - origins) / safe
    t1 = (aabb[1] - origins) / safe
    lo = np.minimum(t0, t1)
    hi = np.maximum(t0, t1)
    inside_slab = (origins >= aabb[0]) & (origins <= aabb[1])
    lo = np.where(parallel, np.where(inside_slab, -np.inf, np.inf), lo)
    hi = np.where(parallel, np.where(inside_slab, np.inf, -np.inf), hi)
    t_near = np.maximum(lo.max(axis=1), 0.0)
    t_far = hi.min(axis=1)
    # tangent rays (t_far == t_near) carry no segment and count as misses
    hit = t_far > t_near
    return np.where(hit, t_near, 0.0), np.where(hit, t_far, 0.0), hit


def stratified_depths(t_near: np.ndarray, t_far: np.ndarray, num_samples: int, rng: Optional[np.random.Generator]) -> np.ndarray:
    """One sample per equal-width bin; bin midpoints when ``rng`` is None."""
    count = t_near.shape[0]
    if rng is None:
        jitter = np.full((count, num_samples), 0.5)
    else:
        jitter = rng.random((count, num_samples))
    fractions = (np.arange(num_samples)[None, :] + jitter) / num_samples
    return t_near[:, None] + (t_far - t_near)[:, None] * fractions


def sample_rays(
    field: RadianceField,
    origins: np.ndarray,
    directions: np.ndarray,
    num_samples: int = DEFAULT_SAMPLES,
    rng: Optional[np.random.Generator] = None,
) -> RaySampleBatch:
    """
    Stratified samples between each ray's aabb entry and exit, with sigma and rgb
    read through trilinear interpolation. Rays that miss get zero-length segments
    and therefore contribute nothing when composited.
    """
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    origins = np.asarray(origins, dtype=np.float64).reshape(-1, 3)
    directions = np.asarray(directions, dtype=np.float64).reshape(-1, 3)
    t_near, t_far, hit = intersect_aabb(origins, directions, field.aabb)

    t = stratified_depths(t_near, t_far, num_samples, rng)
    delta = np.diff(np.concatenate([t_near[:, None], t], axis=1), axis=1)
    positions = origins[:, None, :] + t[..., None] * directions[:, None, :]
    sigma, rgb, raw_density, lookup = field.query(positions)
    return RaySampleBatch(
        t=t,
        delta=delta,
        t_near=t_near,
        hit=hit,
        sigma=sigma,
        rgb=rgb,
        raw_density=raw_density,
        positions=positions,
        lookup=lookup,
    )


def sample_ray(field: RadianceField, ray: Ray, num_samples: int = DEFAULT_SAMPLES, rng: Optional[np.random.Generator] = None) -> RaySampleBatch:
    batch = sample_rays(field, ray.origin[None], ray.direction[None], num_samples, rng)
    if not batch.hit[0]:
        raise NoIntersection(f"ray from {ray.origin.tolist()} along {ray.direction.tolist()} misses the field aabb")
    return batch


def _exclusive_cumsum(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    np.cumsum(x[..., :-1], axis=-1, out=out[..., 1:])
    return out


def composite(batch: RaySampleBatch) -> RenderResult:
    optical = batch.sigma * batch.delta
    batch.opacity = -np.expm1(-optical)
    batch.transmittance = np.exp(-_exclusive_cumsum(optical))
    weights = batch.transmittance * batch.opacity
    return RenderResult(
        rgb=np.einsum("rk,rkc->rc", weights, batch.rgb),
        depth=np.sum(weights * batch.t, axis=-1),
        accumulation=np.sum(weights, axis=-1),
        weights=weights,
    )


def backward_samples(batch: RaySampleBatch, d_rgb=None, d_depth=None, d_accum=None) -> SampleGradients:
    """
    Chain upstream gradients on (rgb, depth, accumulation) down to the raw
    interpolated parameters of every sample.
    """
    if batch.opacity is None or batch.transmittance is None:
        raise RuntimeError("composite() must run on this batch before backward")
    r, k = batch.t.shape
    d_rgb = np.zeros((r, 3)) if d_rgb is None else np.asarray(d_rgb, dtype=np.float64).reshape(r, 3)
    d_depth = np.zeros(r) if d_depth is None else np.asarray(d_depth, dtype=np.float64).reshape(r)
    d_accum = np.zeros(r) if d_accum is None else np.asarray(d_accum, dtype=np.float64).reshape(r)

    weights = batch.transmittance * batch.opacity
    # dL/dw_i for each sample
    g = np.einsum("rc,rkc->rk", d_rgb, batch.rgb) + d_depth[:, None] * batch.t + d_accum[:, None]
    transmittance_next = batch.transmittance * np.exp(-batch.sigma * batch.delta)
    wg = weights * g
    later = np.sum(wg, axis=-1, keepdims=True) - np.cumsum(wg, axis=-1)
    d_optical = g * transmittance_next - later
    d_sigma = d_optical * batch.delta

    d_raw_density = d_sigma * expit(batch.raw_density)
    d_color = weights[..., None] * d_rgb[:, None, :]
    d_raw_color = d_color * batch.rgb * (1.0 - batch.rgb)
    return SampleGradients(batch.lookup, d_raw_density.reshape(-1), d_raw_color.reshape(-1, 3))


def backward(field: RadianceField, batch: RaySampleBatch, d_rgb=None, d_depth=None, d_accum=None) -> None:
    """Accumulate dL/d(density params) and dL/d(colour params) into the field's buffers."""
    backward_samples(batch, d_rgb, d_depth, d_accum).apply(field)


def render_rays(
    field: RadianceField,
    origins: np.ndarray,
    directions: np.ndarray,
    num_samples: int = DEFAULT_SAMPLES,
    chunk: int = 8192,
    rng: Optional[np.random.Generator] = None,
) -> RenderResult:
    """Render many rays in chunks without keeping per-sample buffers around."""
    origins = np.asarray(origins, dtype=np.float64).reshape(-1, 3)
    directions = np.asarray(directions, dtype=np.float64).reshape(-1, 3)
    rgb, depth, acc = [], [], []
    for start in range(0, origins.shape[0], chunk):
        stop = start + chunk
        result = composite(sample_rays(field, origins[start:stop], directions[start:stop], num_samples, rng))
        rgb.append(result.rgb)
        depth.append(result.depth)
        acc.append(result.accumulation)
    return RenderResult(
        rgb=np.concatenate(rgb),
        depth=np.concatenate(depth),
        accumulation=np.concatenate(acc),
        weights=np.empty((0, num_samples)),
    )


@dataclass
class ViewRender:
    rgb: np.ndarray           # (H, W, 3)
    depth: np.ndarray         # (H, W) ray-parameter depth
    accumulation: np.ndarray  # (H, W)


def render_view(field: RadianceField, cam: Camera, num_samples: int = DEFAULT_SAMPLES, chunk: int = 8192) -> ViewRender:
    origins, directions = camera_rays(cam)
    result = render_rays(field, origins, directions, num_samples, chunk)
    h, w = cam.height, cam.width
    return ViewRender(
        rgb=result.rgb.reshape(h, w, 3),
        depth=result.depth.reshape(h, w),
        accumulation=result.accumulation.reshape(h, w),
    )


def render_ray(field: RadianceField, ray: Ray, num_samples: int = DEFAULT_SAMPLES) -> RenderResult:
    return composite(sample_ray(field, ray, num_samples))
