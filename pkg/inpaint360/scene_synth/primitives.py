"""
Analytic primitives: ray intersection, surface normals and signed distances.

Every primitive lives in a local frame: translated to ``center`` and rotated
by ``yaw`` about the world z axis (z is up). ``size`` is kind-specific:

* sphere: (radius,)
* box: (half_x, half_y, half_z)
* cylinder: (radius, half_height), axis along local z
* plane: (half_x, half_y), a horizontal rectangle of zero thickness
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from inpaint360.errors import BadSpec

PrimitiveKind = Literal["sphere", "box", "cylinder", "plane"]
BACKGROUND_ID = 0
_EPS = 1e-9
_SIZE_ARITY = {"sphere": 1, "box": 3, "cylinder": 2, "plane": 2}


@dataclass(frozen=True)
class ScenePrimitive:
    kind: PrimitiveKind
    center: tuple[float, float, float]
    size: tuple[float, ...]
    albedo: tuple[float, float, float]
    instance_id: int
    name: str
    removable: bool = False
    yaw: float = 0.0

    def __post_init__(self):
        if self.kind not in _SIZE_ARITY:
            raise BadSpec(f"unknown primitive kind '{self.kind}'")
        if len(self.size) != _SIZE_ARITY[self.kind]:
            raise BadSpec(f"{self.kind} '{self.name}' needs {_SIZE_ARITY[self.kind]} size values, got {len(self.size)}")
        if any(s <= 0 for s in self.size):
            raise BadSpec(f"{self.kind} '{self.name}' has non-positive size {self.size}")
        if not 1 <= self.instance_id <= 255:
            raise BadSpec(f"instance id {self.instance_id} outside 1..255")

    def _rotation(self) -> np.ndarray:
        c, s = np.cos(self.yaw), np.sin(self.yaw)
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])

    def to_local(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points) - np.asarray(self.center)) @ self._rotation()

    def direction_to_local(self, directions: np.ndarray) -> np.ndarray:
        return np.asarray(directions) @ self._rotation()

    def direction_to_world(self, directions: np.ndarray) -> np.ndarray:
        return np.asarray(directions) @ self._rotation().T

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        """World-space axis-aligned bounds (conservative under yaw)."""
        if self.kind == "sphere":
            half = np.full(3, self.size[0])
        elif self.kind == "box":
            half = np.array(self.size, dtype=np.float64)
        elif self.kind == "cylinder":
            half = np.array([self.size[0], self.size[0], self.size[1]])
        else:
            half = np.array([self.size[0], self.size[1], 0.0])
        if self.yaw != 0.0 and self.kind in ("box", "plane"):
            radius = np.hypot(half[0], half[1])
            half = np.array([radius, radius, half[2]])
        center = np.asarray(self.center, dtype=np.float64)
        return center - half, center + half

    def intersect(self, origins: np.ndarray, directions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Nearest positive hit distance (inf on miss) and world-space unit normal per ray."""
        o = self.to_local(origins)
        d = self.direction_to_local(directions)
        t, n = _INTERSECTORS[self.kind](o, d, self.size)
        return t, self.direction_to_world(n)

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        return _SDF[self.kind](self.to_local(points), self.size)


def _first_positive(t_a: np.ndarray, t_b: np.ndarray) -> np.ndarray:
    t_a = np.where(t_a > _EPS, t_a, np.inf)
    t_b = np.where(t_b > _EPS, t_b, np.inf)
    return np.minimum(t_a, t_b)


def _sphere_hit(o, d, size):
    r = size[0]
    b = np.einsum("...i,...i->...", o, d)
    c = np.einsum("...i,...i->...", o, o) - r * r
    disc = b * b - c
    ok = disc >= 0
    root = np.sqrt(np.where(ok, disc, 0.0))
    t = np.where(ok, _first_positive(-b - root, -b + root), np.inf)
    p = o + np.where(np.isfinite(t), t, 0.0)[..., None] * d
    return t, p / r


def _box_hit(o, d, size):
    half = np.asarray(size, dtype=np.float64)
    parallel = d == 0.0
    safe = np.where(parallel, 1.0, d)
    t0 = (-half - o) / safe
    t1 = (half - o) / safe
    inside = np.abs(o) <= half
    lo = np.where(parallel, np.where(inside, -np.inf, np.inf), np.minimum(t0, t1))
    hi = np.where(parallel, np.where(inside, np.inf, -np.inf), np.maximum(t0, t1))
    t_in = lo.max(axis=-1)
    t_out = hi.min(axis=-1)
    ok = t_out >= np.maximum(t_in, _EPS)
    t = np.where(ok, _first_positive(t_in, t_out), np.inf)
    p = o + np.where(np.isfinite(t), t, 0.0)[..., None] * d
    rel = np.abs(p) / half
    axis = np.argmax(rel, axis=-1)
    n = np.zeros_like(p)
    np.put_along_axis(n, axis[..., None], np.sign(np.take_along_axis(p, axis[..., None], axis=-1)), axis=-1)
    return t, n


def _cylinder_hit(o, d, size):
    radius, half_h = size
    a = d[..., 0] ** 2 + d[..., 1] ** 2
    b = o[..., 0] * d[..., 0] + o[..., 1] * d[..., 1]
    c = o[..., 0] ** 2 + o[..., 1] ** 2 - radius * radius
    safe_a = np.where(a > 0, a, 1.0)
    disc = b * b - a * c
    ok = (disc >= 0) & (a > 0)
    root = np.sqrt(np.where(ok, disc, 0.0))
    side = []
    for sign in (-1.0, 1.0):
        t = (-b + sign * root) / safe_a
        z = o[..., 2] + t * d[..., 2]
        side.append(np.where(ok & (np.abs(z) <= half_h), t, np.inf))
    caps = []
    safe_dz = np.where(d[..., 2] != 0, d[..., 2], 1.0)
    for cap in (-half_h, half_h):
        t = (cap - o[..., 2]) / safe_dz
        x = o[..., 0] + t * d[..., 0]
        y = o[..., 1] + t * d[..., 1]
        caps.append(np.where((d[..., 2] != 0) & (x * x + y * y <= radius * radius), t, np.inf))
    t_side = _first_positive(side[0], side[1])
    t_cap = _first_positive(caps[0], caps[1])
    t = np.minimum(t_side, t_cap)
    p = o + np.where(np.isfinite(t), t, 0.0)[..., None] * d
    n_side = np.stack([p[..., 0], p[..., 1], np.zeros_like(p[..., 0])], axis=-1) / radius
    n_cap = np.zeros_like(p)
    n_cap[..., 2] = np.sign(p[..., 2])
    n = np.where((t_cap < t_side)[..., None], n_cap, n_side)
    return t, n


def _plane_hit(o, d, size):
    half_x, half_y = size
    safe_dz = np.where(d[..., 2] != 0, d[..., 2], 1.0)
    t = -o[..., 2] / safe_dz
    x = o[..., 0] + t * d[..., 0]
    y = o[..., 1] + t * d[..., 1]
    ok = (d[..., 2] != 0) & (t > _EPS) & (np.abs(x) <= half_x) & (np.abs(y) <= half_y)
    t = np.where(ok, t, np.inf)
    n = np.zeros(o.shape)
    n[..., 2] = 1.0
    return t, n


def _sphere_sdf(p, size):
    return np.linalg.norm(p, axis=-1) - size[0]


def _box_sdf(p, size):
    q = np.abs(p) - np.asarray(size)
    outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
    inside = np.minimum(q.max(axis=-1), 0.0)
    return outside + inside


def _cylinder_sdf(p, size):
    radius, half_h = size
    q = np.stack([np.hypot(p[..., 0], p[..., 1]) - radius, np.abs(p[..., 2]) - half_h], axis=-1)
    return np.minimum(q.max(axis=-1), 0.0) + np.linalg.norm(np.maximum(q, 0.0), axis=-1)


def _plane_sdf(p, size):
    # unsigned distance to the rectangle; zero thickness means it is never negative
    q = np.stack([np.abs(p[..., 0]) - size[0], np.abs(p[..., 1]) - size[1], np.abs(p[..., 2])], axis=-1)
    return np.linalg.norm(np.maximum(q, 0.0), axis=-1)


_INTERSECTORS = {"sphere": _sphere_hit, "box": _box_hit, "cylinder": _cylinder_hit, "plane": _plane_hit}
_SDF = {"sphere": _sphere_sdf, "box": _box_sdf, "cylinder": _cylinder_sdf, "plane": _plane_sdf}


def signed_distance(kind: PrimitiveKind, size, local_points: np.ndarray) -> np.ndarray:
    """Signed distance to a primitive at the origin of its own frame (negative inside)."""
    return _SDF[kind](np.asarray(local_points, dtype=np.float64), size)
