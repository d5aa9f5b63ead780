"""Analytic ground-truth rendering of a primitive scene."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from inpaint360.errors import DimensionMismatch
from inpaint360.geometry.camera import Camera, camera_rays, z_from_ray_depth
from .primitives import BACKGROUND_ID
from .scene import Scene


@dataclass(frozen=True)
class ViewData:
    camera: Camera
    rgb: np.ndarray
    depth: np.ndarray
    ids: np.ndarray
    empty_rgb: np.ndarray
    empty_depth: np.ndarray

    def __post_init__(self):
        shape = (self.camera.height, self.camera.width)
        for name in ("rgb", "depth", "ids", "empty_rgb", "empty_depth"):
            if getattr(self, name).shape[:2] != shape:
                raise DimensionMismatch(f"{name} has shape {getattr(self, name).shape}, camera expects {shape}")


@dataclass(frozen=True)
class SyntheticDataset:
    scene: Scene
    views: dict[int, ViewData]

    @property
    def view_indices(self) -> list[int]:
        return sorted(self.views)

    @property
    def cameras(self) -> dict[int, Camera]:
        return {i: v.camera for i, v in self.views.items()}

    def images(self) -> dict[int, np.ndarray]:
        return {i: v.rgb for i, v in self.views.items()}

    def empty_images(self) -> dict[int, np.ndarray]:
        return {i: v.empty_rgb for i, v in self.views.items()}

    def object_mask(self, view: int, instance_id: int) -> np.ndarray:
        return self.views[view].ids == instance_id


@dataclass(frozen=True)
class TraceResult:
    t: np.ndarray
    ids: np.ndarray
    rgb: np.ndarray


def trace_rays(scene: Scene, origins: np.ndarray, directions: np.ndarray) -> TraceResult:
    """Nearest-hit tracing with unshadowed Lambertian shading."""
    shape = directions.shape[:-1]
    t_best = np.full(shape, np.inf)
    ids = np.full(shape, BACKGROUND_ID, dtype=np.uint8)
    normals = np.zeros(shape + (3,))
    albedo = np.zeros(shape + (3,))
    for prim in scene.primitives:
        t, n = prim.intersect(origins, directions)
        closer = t < t_best
        t_best = np.where(closer, t, t_best)
        ids[closer] = prim.instance_id
        normals[closer] = n[closer]
        albedo[closer] = prim.albedo

    facing = np.einsum("...i,...i->...", normals, directions)
    normals = np.where((facing > 0)[..., None], -normals, normals)
    lambert = np.clip(normals @ scene.light_direction, 0.0, None)
    shade = scene.ambient + (1.0 - scene.ambient) * lambert
    hit = np.isfinite(t_best)
    rgb = np.where(hit[..., None], albedo * shade[..., None], scene.background)
    # stored exactly as the 8-bit files will hold it
    rgb = np.round(np.clip(rgb, 0.0, 1.0) * 255.0) / 255.0
    return TraceResult(t=t_best, ids=ids, rgb=rgb)


def render_view_ground_truth(scene: Scene, empty_scene: Scene, cam: Camera) -> ViewData:
    origins, directions = camera_rays(cam)
    full = trace_rays(scene, origins, directions)
    empty = trace_rays(empty_scene, origins, directions)
    return ViewData(
        camera=cam,
        rgb=full.rgb,
        depth=z_from_ray_depth(cam, directions, full.t),
        ids=full.ids,
        empty_rgb=empty.rgb,
        empty_depth=z_from_ray_depth(cam, directions, empty.t),
    )


def render_ground_truth(scene: Scene, cameras: Mapping[int, Camera], workers: int = 1) -> SyntheticDataset:
    """Render every view of ``scene`` plus its paired empty-scene render."""
    empty_scene = scene.without_removables()
    indices = sorted(cameras)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        views = list(pool.map(lambda i: render_view_ground_truth(scene, empty_scene, cameras[i]), indices))
    return SyntheticDataset(scene=scene, views=dict(zip(indices, views)))
