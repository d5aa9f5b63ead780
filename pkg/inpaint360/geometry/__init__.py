"""
inpaint360.geometry

Cameras, rays, projection and backprojection.
"""

from .camera import (
    Behind,
    Camera,
    PixelCoord,
    Projection,
    Ray,
    camera_rays,
    in_bounds,
    look_at,
    pixel_index,
    pixel_to_ray,
    pixels_to_rays,
    point_from_depth,
    points_from_depth,
    project,
    project_points,
    ray_depth_from_z,
    z_from_ray_depth,
)
from .io import load_cameras, save_cameras

__all__ = [
    "Behind",
    "Camera",
    "PixelCoord",
    "Projection",
    "Ray",
    "camera_rays",
    "in_bounds",
    "look_at",
    "pixel_index",
    "pixel_to_ray",
    "pixels_to_rays",
    "point_from_depth",
    "points_from_depth",
    "project",
    "project_points",
    "ray_depth_from_z",
    "z_from_ray_depth",
    "load_cameras",
    "save_cameras",
]
