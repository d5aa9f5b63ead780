from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from inpaint360.errors import OutOfBounds
from inpaint360.field.grid import RadianceField


@dataclass(frozen=True, eq=False)
class OccupancyCube:
    """``values[i, j, k]`` is +1 (occupied) or -1 (empty) at the cell center along x, y, z."""

    values: np.ndarray
    center: np.ndarray
    edge: float

    def __post_init__(self):
        if self.edge <= 0:
            raise ValueError(f"cube edge must be positive, got {self.edge}")

    @property
    def resolution(self) -> int:
        return self.values.shape[0]

    @property
    def occupied_fraction(self) -> float:
        return float(np.mean(self.values > 0))


def cube_cell_centers(center, edge: float, resolution: int) -> np.ndarray:
    """World positions of the ``resolution**3`` cell centers, shaped (m, m, m, 3)."""
    offsets = (np.arange(resolution) + 0.5) / resolution * edge - edge / 2.0
    gx, gy, gz = np.meshgrid(offsets, offsets, offsets, indexing="ij")
    return np.stack([gx, gy, gz], axis=-1) + np.asarray(center, dtype=np.float64)


def check_cube_inside(field: RadianceField, center, edge: float, tol: float = 1e-9) -> None:
    center = np.asarray(center, dtype=np.float64)
    if np.any(center - edge / 2.0 < field.aabb_min - tol) or np.any(center + edge / 2.0 > field.aabb_max + tol):
        raise OutOfBounds(f"cube at {center.tolist()} with edge {edge} leaves the field bounds")


def voxelize(field: RadianceField, cube_center, edge: float, rho: float, resolution: int = 16) -> OccupancyCube:
    """Threshold the field's density at the cube's cell centers."""
    check_cube_inside(field, cube_center, edge)
    sigma = field.density_at(cube_cell_centers(cube_center, edge, resolution))
    return OccupancyCube(
        values=np.where(sigma > rho, 1.0, -1.0).astype(np.float32),
        center=np.asarray(cube_center, dtype=np.float64),
        edge=float(edge),
    )
