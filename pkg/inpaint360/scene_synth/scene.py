"""Procedural scene description and the camera rig that observes it."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from inpaint360.errors import BadSpec, UnknownObject
from inpaint360.geometry.camera import Camera, look_at
from inpaint360.inpaint360_logging import get_logger
from .primitives import PrimitiveKind, ScenePrimitive

logger = get_logger(__name__)

Vec3 = tuple[float, float, float]


class PrimitiveSpec(BaseModel):
    kind: PrimitiveKind
    name: str = Field(min_length=1)
    center: Vec3
    size: tuple[float, ...]
    albedo: Vec3 = (0.7, 0.7, 0.7)
    yaw_deg: float = 0.0
    removable: bool = False


class CameraRigConfig(BaseModel):
    layout: Literal["ring", "frontal"] = "ring"
    num_views: int = Field(40, ge=1)
    radius: float = Field(2.6, gt=0)
    elevation_deg: float = Field(30.0, gt=-90, lt=90)
    # frontal layout only: azimuth span centred on ``azimuth_deg``
    arc_deg: float = Field(60.0, gt=0, le=360)
    azimuth_deg: float = 0.0
    width: int = Field(64, ge=1)
    height: int = Field(64, ge=1)
    fov_deg: float = Field(45.0, gt=0, lt=180)


def _default_primitives() -> list[PrimitiveSpec]:
    return [
        PrimitiveSpec(kind="plane", name="floor", center=(0.0, 0.0, -0.62), size=(0.95, 0.95), albedo=(0.55, 0.5, 0.45)),
        PrimitiveSpec(kind="box", name="table", center=(0.0, 0.0, -0.5), size=(0.5, 0.5, 0.12), albedo=(0.6, 0.4, 0.25)),
        PrimitiveSpec(
            kind="cylinder", name="flowerpot", center=(0.05, 0.0, -0.2), size=(0.14, 0.18),
            albedo=(0.75, 0.3, 0.2), removable=True,
        ),
        PrimitiveSpec(
            kind="sphere", name="flowers", center=(0.05, 0.0, 0.12), size=(0.15,),
            albedo=(0.9, 0.8, 0.2), removable=True,
        ),
        PrimitiveSpec(kind="sphere", name="ball", center=(-0.3, 0.3, -0.28), size=(0.1,), albedo=(0.2, 0.4, 0.8)),
    ]


class SceneSpec(BaseModel):
    """The flowerpot-on-a-table scene unless overridden."""

    primitives: list[PrimitiveSpec] = Field(default_factory=_default_primitives)
    cameras: CameraRigConfig = Field(default_factory=CameraRigConfig)
    background: Vec3 = (0.0, 0.0, 0.0)
    light_direction: Vec3 = (0.4, 0.3, 0.85)
    ambient: float = Field(0.35, ge=0, le=1)
    albedo_jitter: float = Field(0.03, ge=0)
    yaw_jitter_deg: float = Field(10.0, ge=0)

    @model_validator(mode="after")
    def _names_unique(self):
        names = [p.name for p in self.primitives]
        if len(names) != len(set(names)):
            raise ValueError(f"primitive names must be unique, got {names}")
        return self


@dataclass(frozen=True)
class Scene:
    primitives: tuple[ScenePrimitive, ...]
    centroid: np.ndarray
    background: np.ndarray
    light_direction: np.ndarray
    ambient: float

    def by_name(self, name: str) -> ScenePrimitive:
        for prim in self.primitives:
            if prim.name == name:
                return prim
        raise UnknownObject(name)

    @property
    def instance_ids(self) -> tuple[int, ...]:
        return tuple(p.instance_id for p in self.primitives)

    @property
    def removable_ids(self) -> tuple[int, ...]:
        return tuple(p.instance_id for p in self.primitives if p.removable)

    def without_removables(self) -> "Scene":
        return replace(self, primitives=tuple(p for p in self.primitives if not p.removable))

    def to_document(self) -> dict:
        return {
            "version": 1,
            "centroid": [float(x) for x in self.centroid],
            "background": [float(x) for x in self.background],
            "light_direction": [float(x) for x in self.light_direction],
            "ambient": float(self.ambient),
            "primitives": [
                {
                    "kind": p.kind,
                    "name": p.name,
                    "instance_id": p.instance_id,
                    "center": list(p.center),
                    "size": list(p.size),
                    "albedo": list(p.albedo),
                    "yaw": p.yaw,
                    "removable": p.removable,
                }
                for p in self.primitives
            ],
        }

    @classmethod
    def from_document(cls, doc: dict) -> "Scene":
        try:
            primitives = tuple(
                ScenePrimitive(
                    kind=p["kind"],
                    center=tuple(float(x) for x in p["center"]),
                    size=tuple(float(x) for x in p["size"]),
                    albedo=tuple(float(x) for x in p["albedo"]),
                    instance_id=int(p["instance_id"]),
                    name=p["name"],
                    removable=bool(p["removable"]),
                    yaw=float(p["yaw"]),
                )
                for p in doc["primitives"]
            )
            return cls(
                primitives=primitives,
                centroid=np.asarray(doc["centroid"], dtype=np.float64),
                background=np.asarray(doc["background"], dtype=np.float64),
                light_direction=np.asarray(doc["light_direction"], dtype=np.float64),
                ambient=float(doc["ambient"]),
            )
        except (KeyError, TypeError) as exc:
            raise BadSpec(f"malformed scene document: {exc}") from exc


def scene_centroid(primitives) -> np.ndarray:
    """Mean center of the non-planar primitives (planes only set the stage)."""
    solids = [p.center for p in primitives if p.kind != "plane"] or [p.center for p in primitives]
    return np.mean(np.asarray(solids, dtype=np.float64), axis=0)


def camera_azimuths(rig: CameraRigConfig) -> np.ndarray:
    if rig.layout == "ring":
        return 2.0 * np.pi * np.arange(rig.num_views) / rig.num_views + np.deg2rad(rig.azimuth_deg)
    half = np.deg2rad(rig.arc_deg) / 2.0
    center = np.deg2rad(rig.azimuth_deg)
    if rig.num_views == 1:
        return np.array([center])
    return np.linspace(center - half, center + half, rig.num_views)


def build_cameras(rig: CameraRigConfig, target: np.ndarray) -> dict[int, Camera]:
    focal = 0.5 * rig.width / np.tan(np.deg2rad(rig.fov_deg) / 2.0)
    elevation = np.deg2rad(rig.elevation_deg)
    cameras = {}
    for index, azimuth in enumerate(camera_azimuths(rig)):
        offset = rig.radius * np.array(
            [np.cos(elevation) * np.cos(azimuth), np.cos(elevation) * np.sin(azimuth), np.sin(elevation)]
        )
        cameras[index] = Camera(
            width=rig.width,
            height=rig.height,
            focal_x=float(focal),
            focal_y=float(focal),
            principal_x=rig.width / 2.0,
            principal_y=rig.height / 2.0,
            cam_to_world=look_at(target + offset, target),
        )
    return cameras


def generate_scene(spec: Optional[SceneSpec] = None, seed: int = 0) -> tuple[Scene, dict[int, Camera]]:
    """
    Instantiate ``spec`` into concrete primitives plus the camera rig.

    The seed only perturbs albedos and box/plane yaw, so support relations
    between objects (pot on table, table on floor) survive any seed.
    """
    spec = spec or SceneSpec()
    if not spec.primitives:
        raise BadSpec("scene has no primitives")
    if not any(p.removable for p in spec.primitives):
        raise BadSpec("scene names no removable object")
    if len(spec.primitives) > 255:
        raise BadSpec("at most 255 primitives fit the 8-bit instance map")

    rng = np.random.default_rng(seed)
    primitives = []
    for instance_id, prim in enumerate(spec.primitives, start=1):
        jitter = rng.uniform(-1.0, 1.0, size=4)
        albedo = np.clip(np.asarray(prim.albedo) + spec.albedo_jitter * jitter[:3], 0.0, 1.0)
        yaw = np.deg2rad(prim.yaw_deg)
        if prim.kind in ("box", "plane"):
            yaw += np.deg2rad(spec.yaw_jitter_deg) * jitter[3]
        primitives.append(
            ScenePrimitive(
                kind=prim.kind,
                center=tuple(float(x) for x in prim.center),
                size=tuple(float(x) for x in prim.size),
                albedo=tuple(float(x) for x in albedo),
                instance_id=instance_id,
                name=prim.name,
                removable=prim.removable,
                yaw=float(yaw),
            )
        )

    light = np.asarray(spec.light_direction, dtype=np.float64)
    if np.linalg.norm(light) == 0:
        raise BadSpec("light direction must be non-zero")
    centroid = scene_centroid(primitives)
    scene = Scene(
        primitives=tuple(primitives),
        centroid=centroid,
        background=np.asarray(spec.background, dtype=np.float64),
        light_direction=light / np.linalg.norm(light),
        ambient=spec.ambient,
    )
    cameras = build_cameras(spec.cameras, centroid)
    logger.debug(
        "scene generated: {} primitives, removable {}, {} views",
        len(primitives), [p.name for p in primitives if p.removable], len(cameras),
    )
    return scene, cameras
