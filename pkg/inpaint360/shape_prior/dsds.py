"""
Density score distillation: the diffusion prior's verdict on a cube turned
into a density penalty, gated to cubes near the inpainted region.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import expit

from inpaint360.field.grid import RadianceField
from inpaint360.geometry.camera import Camera
from inpaint360.segment.refine import backproject_pixels
from .config import PriorConfig
from .denoiser import DenoiserNet
from .occupancy import cube_cell_centers
from .schedule import NoiseSchedule, predict_x0, q_sample


def dsds_loss(sigma: np.ndarray, x0_pred: np.ndarray, w: float) -> tuple[float, np.ndarray]:
    """
    ``sum(u * sigma + (1 - u) * max(w - sigma, 0))`` with ``u = [x0_pred < 0]``.

    Returns the loss and its gradient with respect to ``sigma``.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    x0_pred = np.asarray(x0_pred)
    if sigma.shape != x0_pred.shape:
        raise ValueError(f"density {sigma.shape} and prediction {x0_pred.shape} shapes differ")
    empty = x0_pred < 0
    deficit = np.maximum(w - sigma, 0.0)
    loss = float(np.sum(np.where(empty, sigma, deficit)))
    grad = np.where(empty, 1.0, np.where(sigma < w, -1.0, 0.0))
    return loss, grad


def candidate_cube_centers(field: RadianceField, edge: float) -> np.ndarray:
    """Centers of the non-overlapping cubes of side ``edge`` tiling the field bounds."""
    axes = []
    for lo, hi in zip(field.aabb_min, field.aabb_max):
        count = int(np.floor((hi - lo) / edge + 1e-9))
        axes.append(lo + edge / 2.0 + edge * np.arange(count))
    grid = np.meshgrid(*axes, indexing="ij")
    return np.stack(grid, axis=-1).reshape(-1, 3)


def visible_points(
    masks: Mapping[int, np.ndarray], cameras: Mapping[int, Camera], depths: Mapping[int, np.ndarray]
) -> np.ndarray:
    """World points behind every in-mask pixel with a finite positive rendered z-depth."""
    points = [np.zeros((0, 3))]
    for view in sorted(masks):
        rows, cols = np.nonzero(masks[view])
        z = depths[view][rows, cols]
        ok = np.isfinite(z) & (z > 0)
        if ok.any():
            points.append(backproject_pixels(cameras[view], rows[ok], cols[ok], z[ok]))
    return np.concatenate(points)


def visible_cube_centers(
    field: RadianceField,
    masks: Mapping[int, np.ndarray],
    cameras: Mapping[int, Camera],
    depths: Mapping[int, np.ndarray],
    cfg: PriorConfig,
) -> np.ndarray:
    """Candidate cubes whose center lies within the visibility radius of a masked surface point."""
    points = visible_points(masks, cameras, depths)
    centers = candidate_cube_centers(field, cfg.cube_edge)
    if points.shape[0] == 0 or centers.shape[0] == 0:
        return np.zeros((0, 3))
    distance, _ = cKDTree(points).query(centers, k=1, distance_upper_bound=cfg.visibility_radius)
    return centers[np.isfinite(distance)]


@dataclass
class GeomLossResult:
    loss: float
    cubes: int
    occupied_fraction: float


def geom_loss_on_cubes(
    field: RadianceField,
    centers: np.ndarray,
    net: DenoiserNet,
    schedule: NoiseSchedule,
    cfg: PriorConfig,
    rng: np.random.Generator,
    weight: Optional[float] = None,
) -> GeomLossResult:
    """
    Score the cubes at ``centers``: voxelize, noise to ``t*``, estimate the
    clean occupancy in one shot and apply ``dsds_loss``.

    The returned loss is unweighted; density gradients scaled by ``weight``
    (``cfg.lambda_geom`` when None, nothing when 0) go into the field.
    """
    weight = cfg.lambda_geom if weight is None else weight
    if centers.shape[0] == 0:
        return GeomLossResult(loss=0.0, cubes=0, occupied_fraction=0.0)
    m = cfg.cube_resolution
    cells = np.stack([cube_cell_centers(c, cfg.cube_edge, m) for c in centers])
    sigma, _, raw_density, lookup = field.query(cells)
    x0 = np.where(sigma > cfg.rho, 1.0, -1.0)
    eps = rng.standard_normal(x0.shape)
    x_t = q_sample(x0, cfg.t_star, eps, schedule)
    x0_pred = predict_x0(x_t, cfg.t_star, net(x_t, cfg.t_star).astype(np.float64), schedule)
    loss, grad = dsds_loss(sigma, x0_pred, cfg.w)
    if weight > 0:
        d_raw = weight * grad * expit(raw_density)
        field.accumulate_density_grad(lookup, d_raw.reshape(-1))
    return GeomLossResult(loss=loss, cubes=int(centers.shape[0]), occupied_fraction=float(np.mean(x0_pred >= 0)))


def geom_loss(
    field: RadianceField,
    masks: Mapping[int, np.ndarray],
    cameras: Mapping[int, Camera],
    depths: Mapping[int, np.ndarray],
    net: DenoiserNet,
    schedule: NoiseSchedule,
    cfg: PriorConfig,
    rng: Optional[np.random.Generator] = None,
    weight: Optional[float] = None,
) -> GeomLossResult:
    """Visibility-gated prior loss over every visible cube (``cfg.cubes_per_step`` of them when ``rng`` is given)."""
    centers = visible_cube_centers(field, masks, cameras, depths, cfg)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    elif centers.shape[0] > cfg.cubes_per_step:
        centers = centers[np.sort(rng.choice(centers.shape[0], size=cfg.cubes_per_step, replace=False))]
    return geom_loss_on_cubes(field, centers, net, schedule, cfg, rng, weight)
