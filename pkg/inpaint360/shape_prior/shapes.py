"""
Procedural shape corpus for training the geometric prior.

Five families (sphere, box, cylinder, L-bracket, plane) at random scales and
yaw. Shapes are centred on the origin; occupancy is ``signed distance <= 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from inpaint360.scene_synth.primitives import signed_distance
from .config import PriorConfig
from .occupancy import OccupancyCube, cube_cell_centers

ShapeFamily = Literal["sphere", "box", "cylinder", "lbracket", "plane"]
SHAPE_FAMILIES: tuple[ShapeFamily, ...] = ("sphere", "box", "cylinder", "lbracket", "plane")


@dataclass(frozen=True)
class ProceduralShape:
    family: ShapeFamily
    size: tuple[float, ...]
    yaw: float = 0.0

    def _local(self, points: np.ndarray) -> np.ndarray:
        c, s = np.cos(self.yaw), np.sin(self.yaw)
        rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        return np.asarray(points, dtype=np.float64) @ rot

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        p = self._local(points)
        if self.family == "sphere":
            return signed_distance("sphere", self.size, p)
        if self.family == "cylinder":
            return signed_distance("cylinder", self.size, p)
        if self.family in ("box", "plane"):
            return signed_distance("box", self.size, p)
        # L-bracket: a base slab plus an upright slab along its -x edge
        length, depth, thickness, height = self.size
        base = signed_distance("box", (length, depth, thickness), p - np.array([0.0, 0.0, -height + thickness]))
        upright = signed_distance("box", (thickness, depth, height), p - np.array([-length + thickness, 0.0, 0.0]))
        return np.minimum(base, upright)

    def occupancy(self, points: np.ndarray) -> np.ndarray:
        return self.signed_distance(points) <= 0.0

    def half_extents(self) -> np.ndarray:
        if self.family == "sphere":
            half = np.full(3, self.size[0])
        elif self.family == "cylinder":
            half = np.array([self.size[0], self.size[0], self.size[1]])
        elif self.family == "lbracket":
            length, depth, _, height = self.size
            half = np.array([length, depth, height])
        else:
            half = np.asarray(self.size, dtype=np.float64)
        if self.family in ("box", "plane", "lbracket") and self.yaw != 0.0:
            radius = np.hypot(half[0], half[1])
            half = np.array([radius, radius, half[2]])
        return half

    @property
    def bounding_volume(self) -> float:
        return float(np.prod(2.0 * self.half_extents()))

    def to_document(self) -> dict:
        return {"family": self.family, "size": list(self.size), "yaw": self.yaw}

    @classmethod
    def from_document(cls, doc: dict) -> "ProceduralShape":
        return cls(family=doc["family"], size=tuple(doc["size"]), yaw=float(doc["yaw"]))


def random_shape(family: ShapeFamily, rng: np.random.Generator) -> ProceduralShape:
    yaw = float(rng.uniform(0.0, np.pi))
    if family == "sphere":
        return ProceduralShape("sphere", (float(rng.uniform(0.2, 0.6)),))
    if family == "box":
        return ProceduralShape("box", tuple(float(x) for x in rng.uniform(0.15, 0.6, size=3)), yaw)
    if family == "cylinder":
        return ProceduralShape("cylinder", (float(rng.uniform(0.15, 0.5)), float(rng.uniform(0.15, 0.6))))
    if family == "plane":
        a, b = rng.uniform(0.3, 0.7, size=2)
        return ProceduralShape("plane", (float(a), float(b), float(rng.uniform(0.03, 0.08))), yaw)
    length, depth, height = rng.uniform(0.25, 0.6, size=3)
    thickness = float(rng.uniform(0.06, 0.12))
    return ProceduralShape("lbracket", (float(length), float(depth), thickness, float(height)), yaw)


def shape_corpus(count: int, seed: int = 0) -> list[ProceduralShape]:
    """``count`` shapes cycling through the families."""
    rng = np.random.default_rng(seed)
    return [random_shape(SHAPE_FAMILIES[i % len(SHAPE_FAMILIES)], rng) for i in range(count)]


def voxelize_shape(shape: ProceduralShape, center: np.ndarray, edge: float, resolution: int) -> OccupancyCube:
    cells = cube_cell_centers(center, edge, resolution)
    values = np.where(shape.occupancy(cells), 1.0, -1.0).astype(np.float32)
    return OccupancyCube(values=values, center=np.asarray(center, dtype=np.float64), edge=float(edge))


def sample_training_cubes(shape: ProceduralShape, cfg: PriorConfig, seed: int = 0) -> list[OccupancyCube]:
    """
    ``cfg.cubes_per_shape`` crops whose volume is a uniform fraction of the
    shape's bounding volume, centred uniformly inside the bounding box.
    """
    volume = shape.bounding_volume
    if volume <= 0:
        raise ValueError("shape has no volume")
    rng = np.random.default_rng(seed)
    half = shape.half_extents()
    cubes = []
    for _ in range(cfg.cubes_per_shape):
        fraction = rng.uniform(cfg.fraction_min, cfg.fraction_max)
        edge = float(np.cbrt(fraction * volume))
        center = rng.uniform(-half, half)
        cubes.append(voxelize_shape(shape, center, edge, cfg.cube_resolution))
    return cubes


def corpus_cubes(cfg: PriorConfig) -> tuple[list[ProceduralShape], list[OccupancyCube]]:
    shapes = shape_corpus(cfg.num_shapes, cfg.seed)
    cubes = []
    for index, shape in enumerate(shapes):
        cubes.extend(sample_training_cubes(shape, cfg, seed=cfg.seed * 100003 + index))
    return shapes, cubes


def corpus_document(shapes: list[ProceduralShape], cfg: PriorConfig) -> dict:
    """Structured description of the training corpus, written next to the denoiser checkpoint."""
    return {
        "version": 1,
        "seed": cfg.seed,
        "cube_resolution": cfg.cube_resolution,
        "cubes_per_shape": cfg.cubes_per_shape,
        "fraction_range": [cfg.fraction_min, cfg.fraction_max],
        "shapes": [s.to_document() for s in shapes],
    }
