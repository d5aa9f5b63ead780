"""
Pinhole cameras, rays, projection and backprojection.

Conventions (fixed for the whole package):

* pixel centers sit at ``i + 0.5``; ``u`` runs along image columns, ``v`` down rows;
* cameras are stored camera-to-world; the camera looks down its local ``-z``
  with ``+y`` up (OpenGL style);
* ``project`` reports z-depth (distance along the view axis) while rays are
  parameterized by Euclidean distance ``t``. ``z_from_ray_depth`` and
  ``ray_depth_from_z`` convert between the two.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from inpaint360.errors import InvalidCamera

ORTHONORMAL_TOL = 1e-6


@dataclass(frozen=True)
class PixelCoord:
    u: float
    v: float


@dataclass(frozen=True)
class Ray:
    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=np.float64).reshape(3))
        object.__setattr__(self, "direction", np.asarray(self.direction, dtype=np.float64).reshape(3))


@dataclass(frozen=True)
class Projection:
    pixel: PixelCoord
    depth: float


@dataclass(frozen=True)
class Behind:
    """The point sits on or behind the image plane; ``depth`` is its (non-positive) z-depth."""

    depth: float


@dataclass(frozen=True)
class Camera:
    width: int
    height: int
    focal_x: float
    focal_y: float
    principal_x: float
    principal_y: float
    cam_to_world: np.ndarray

    def __post_init__(self):
        c2w = np.array(self.cam_to_world, dtype=np.float64).reshape(4, 4)
        c2w.setflags(write=False)
        object.__setattr__(self, "cam_to_world", c2w)

        if self.width <= 0 or self.height <= 0:
            raise InvalidCamera(f"image size must be positive, got {self.width}x{self.height}")
        if not (self.focal_x > 0 and self.focal_y > 0):
            raise InvalidCamera(f"focal lengths must be positive, got ({self.focal_x}, {self.focal_y})")
        if not (0.0 <= self.principal_x <= self.width and 0.0 <= self.principal_y <= self.height):
            raise InvalidCamera(
                f"principal point ({self.principal_x}, {self.principal_y}) outside "
                f"{self.width}x{self.height} image"
            )
        rotation = c2w[:3, :3]
        if np.max(np.abs(rotation.T @ rotation - np.eye(3))) >= ORTHONORMAL_TOL:
            raise InvalidCamera("cam_to_world rotation block is not orthonormal")
        if not np.array_equal(c2w[3], [0.0, 0.0, 0.0, 1.0]):
            raise InvalidCamera("cam_to_world last row must be [0, 0, 0, 1]")

    @property
    def rotation(self) -> np.ndarray:
        return self.cam_to_world[:3, :3]

    @property
    def center(self) -> np.ndarray:
        return self.cam_to_world[:3, 3]

    @property
    def forward(self) -> np.ndarray:
        """World-space unit view axis (the camera's local -z)."""
        return -self.cam_to_world[:3, 2]

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    def pixel_grid(self) -> tuple[np.ndarray, np.ndarray]:
        """Pixel-center coordinates ``(u, v)`` for every pixel, each shaped (H, W)."""
        u, v = np.meshgrid(np.arange(self.width) + 0.5, np.arange(self.height) + 0.5, indexing="xy")
        return u, v


def look_at(eye, target, up=(0.0, 0.0, 1.0)) -> np.ndarray:
    """Camera-to-world matrix for a camera at ``eye`` looking at ``target``."""
    eye = np.asarray(eye, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    forward = target - eye
    forward /= np.linalg.norm(forward)
    right = np.cross(forward, np.asarray(up, dtype=np.float64))
    if np.linalg.norm(right) < 1e-12:
        right = np.cross(forward, np.array([0.0, 1.0, 0.0]))
    right /= np.linalg.norm(right)
    true_up = np.cross(right, forward)
    c2w = np.eye(4)
    c2w[:3, 0] = right
    c2w[:3, 1] = true_up
    c2w[:3, 2] = -forward
    c2w[:3, 3] = eye
    return c2w


def pixels_to_rays(cam: Camera, u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Rays through arbitrary (possibly out-of-bounds) pixel coordinates.

    Returns ``origins`` and unit ``directions``, both shaped ``u.shape + (3,)``.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    local = np.stack(
        [
            (u - cam.principal_x) / cam.focal_x,
            -(v - cam.principal_y) / cam.focal_y,
            -np.ones_like(u),
        ],
        axis=-1,
    )
    directions = local @ cam.rotation.T
    directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    origins = np.broadcast_to(cam.center, directions.shape).copy()
    return origins, directions


def pixel_to_ray(cam: Camera, px: PixelCoord) -> Ray:
    origins, directions = pixels_to_rays(cam, np.array(px.u), np.array(px.v))
    return Ray(origins, directions)


def camera_rays(cam: Camera) -> tuple[np.ndarray, np.ndarray]:
    """Rays through every pixel center, shaped (H, W, 3)."""
    u, v = cam.pixel_grid()
    return pixels_to_rays(cam, u, v)


def point_from_depth(ray: Ray, t: float) -> np.ndarray:
    return ray.origin + t * ray.direction


def points_from_depth(origins: np.ndarray, directions: np.ndarray, t: np.ndarray) -> np.ndarray:
    return origins + np.asarray(t)[..., None] * directions


def project_points(cam: Camera, points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Project world points into ``cam``.

    Returns ``(u, v, z)``: pixel coordinates and z-depth. Entries with
    ``z <= 0`` are behind the camera; their ``u, v`` are NaN.
    """
    points = np.asarray(points, dtype=np.float64)
    local = (points - cam.center) @ cam.rotation
    z = -local[..., 2]
    in_front = z > 0
    safe_z = np.where(in_front, z, 1.0)
    u = cam.principal_x + cam.focal_x * local[..., 0] / safe_z
    v = cam.principal_y - cam.focal_y * local[..., 1] / safe_z
    u = np.where(in_front, u, np.nan)
    v = np.where(in_front, v, np.nan)
    return u, v, z


def project(cam: Camera, point) -> Union[Projection, Behind]:
    u, v, z = project_points(cam, np.asarray(point, dtype=np.float64).reshape(1, 3))
    if z[0] <= 0:
        return Behind(depth=float(z[0]))
    return Projection(PixelCoord(float(u[0]), float(v[0])), float(z[0]))


def z_from_ray_depth(cam: Camera, directions: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Convert distance along unit rays into z-depth along the view axis."""
    return np.asarray(t) * (np.asarray(directions) @ cam.forward)


def ray_depth_from_z(cam: Camera, directions: np.ndarray, z: np.ndarray) -> np.ndarray:
    cos = np.asarray(directions) @ cam.forward
    return np.asarray(z) / cos


def in_bounds(cam: Camera, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """True where a finite pixel coordinate falls inside the image."""
    u = np.asarray(u)
    v = np.asarray(v)
    finite = np.isfinite(u) & np.isfinite(v)
    with np.errstate(invalid="ignore"):
        return finite & (u >= 0) & (u < cam.width) & (v >= 0) & (v < cam.height)


def pixel_index(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Integer (row, col) of the pixel containing each coordinate; callers check bounds first."""
    u = np.nan_to_num(np.asarray(u), nan=-1.0)
    v = np.nan_to_num(np.asarray(v), nan=-1.0)
    return np.floor(v).astype(np.int64), np.floor(u).astype(np.int64)
