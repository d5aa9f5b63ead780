"""
On-disk formats for images, depths, instance ids, masks and the dataset manifest.

* RGB: 8-bit PNG.
* Depth: 16-bit grayscale PNG holding ``round(z / depth_scale)``; pixels
  without geometry store 0 and are flagged in a separate validity PNG.
* Instance ids: 8-bit palette PNG (index = instance id, 0 = background).
* Masks: 8-bit grayscale PNG holding only 0 or 255.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
from PIL import Image

from inpaint360.documents import read_json, write_json
from inpaint360.errors import ConfigError, DimensionMismatch, MissingInput
from inpaint360.geometry.camera import Camera
from inpaint360.geometry.io import load_cameras, save_cameras
from .raytrace import SyntheticDataset, ViewData
from .scene import Scene

PathLike = Union[str, Path]
# finest depth step; coarser when the deepest pixel would overflow 16 bits
DEPTH_SCALE = 1e-4
_MAX_TICK = np.iinfo(np.uint16).max - 1
MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1


def _open(path: PathLike) -> Image.Image:
    path = Path(path)
    if not path.exists():
        raise MissingInput(str(path))
    return Image.open(path)


def save_rgb(path: PathLike, rgb: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = np.round(np.clip(rgb, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(data).save(path)
    return path


def load_rgb(path: PathLike) -> np.ndarray:
    with _open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0


def save_depth(path: PathLike, valid_path: PathLike, depth: np.ndarray, scale: float = DEPTH_SCALE) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    valid = np.isfinite(depth)
    ticks = np.zeros(depth.shape, dtype=np.int64)
    ticks[valid] = np.round(depth[valid] / scale)
    if ticks.max(initial=0) > np.iinfo(np.uint16).max or ticks.min(initial=0) < 0:
        raise ConfigError(f"depth range [{np.nanmin(depth[valid])}, {np.nanmax(depth[valid])}] overflows 16 bits at scale {scale}")
    Image.fromarray(ticks.astype(np.uint16)).save(path)
    save_mask(valid_path, valid)
    return path


def load_depth(path: PathLike, valid_path: PathLike, scale: float = DEPTH_SCALE) -> np.ndarray:
    with _open(path) as img:
        ticks = np.asarray(img).astype(np.float64)
    valid = load_mask(valid_path)
    if valid.shape != ticks.shape:
        raise DimensionMismatch(f"depth {ticks.shape} and validity plane {valid.shape} disagree")
    return np.where(valid, ticks * scale, np.inf)


def id_palette() -> list[int]:
    """Background black, then well separated hues by golden-angle stepping."""
    palette = [0, 0, 0]
    for index in range(1, 256):
        hue = (index * 0.618033988749895) % 1.0
        r, g, b = (np.clip(np.abs((hue * 6.0 + k) % 6.0 - 3.0) - 1.0, 0.0, 1.0) for k in (0.0, 4.0, 2.0))
        palette.extend(int(round(255 * c)) for c in (r, g, b))
    return palette


def save_ids(path: PathLike, ids: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = np.ascontiguousarray(ids, dtype=np.uint8)
    img = Image.frombytes("P", (data.shape[1], data.shape[0]), data.tobytes())
    img.putpalette(id_palette())
    img.save(path)
    return path


def load_ids(path: PathLike) -> np.ndarray:
    with _open(path) as img:
        if img.mode != "P":
            raise ConfigError(f"{path}: instance ids must be a palette PNG, got mode {img.mode}")
        return np.asarray(img, dtype=np.uint8)


def save_mask(path: PathLike, mask: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.where(mask, 255, 0).astype(np.uint8)).save(path)
    return path


def load_mask(path: PathLike) -> np.ndarray:
    with _open(path) as img:
        data = np.asarray(img.convert("L"))
    if not np.isin(data, (0, 255)).all():
        raise ConfigError(f"{path}: masks must hold only 0 or 255")
    return data == 255


def depth_scale_for(*depths: np.ndarray) -> float:
    """Smallest step not finer than ``DEPTH_SCALE`` that fits the deepest finite pixel in 16 bits."""
    deepest = max((float(d[np.isfinite(d)].max(initial=0.0)) for d in depths), default=0.0)
    return max(DEPTH_SCALE, deepest / _MAX_TICK)


def _view_files(view: int) -> dict[str, str]:
    stem = f"{view:03d}"
    return {
        "rgb": f"rgb/{stem}.png",
        "depth": f"depth/{stem}.png",
        "depth_valid": f"depth/{stem}_valid.png",
        "ids": f"ids/{stem}.png",
        "empty_rgb": f"empty/rgb_{stem}.png",
        "empty_depth": f"empty/depth_{stem}.png",
        "empty_depth_valid": f"empty/depth_{stem}_valid.png",
    }


def save_dataset(dataset: SyntheticDataset, directory: PathLike, depth_scale: Optional[float] = None) -> Path:
    """
    Write every view plus ``scene.json``, ``cameras.json`` and the manifest; returns the manifest path.

    Without an explicit ``depth_scale`` one is chosen from the deepest pixel of the
    dataset; either way it is recorded in the manifest.
    """
    directory = Path(directory)
    if depth_scale is None:
        depth_scale = depth_scale_for(*(d for v in dataset.views.values() for d in (v.depth, v.empty_depth)))
    views = {}
    for index in dataset.view_indices:
        view = dataset.views[index]
        files = _view_files(index)
        save_rgb(directory / files["rgb"], view.rgb)
        save_depth(directory / files["depth"], directory / files["depth_valid"], view.depth, depth_scale)
        save_ids(directory / files["ids"], view.ids)
        save_rgb(directory / files["empty_rgb"], view.empty_rgb)
        save_depth(directory / files["empty_depth"], directory / files["empty_depth_valid"], view.empty_depth, depth_scale)
        views[str(index)] = files
    write_json(directory / "scene.json", dataset.scene.to_document())
    save_cameras(directory / "cameras.json", dataset.cameras)
    manifest = {
        "version": MANIFEST_VERSION,
        "depth_scale": depth_scale,
        "scene": "scene.json",
        "cameras": "cameras.json",
        "views": views,
    }
    return write_json(directory / MANIFEST_NAME, manifest)


def load_manifest(directory: PathLike) -> dict:
    manifest = read_json(Path(directory) / MANIFEST_NAME)
    if manifest.get("version") != MANIFEST_VERSION:
        raise ConfigError(f"unsupported dataset manifest version {manifest.get('version')!r}")
    return manifest


def load_dataset(directory: PathLike) -> SyntheticDataset:
    directory = Path(directory)
    manifest = load_manifest(directory)
    scale = float(manifest["depth_scale"])
    scene = Scene.from_document(read_json(directory / manifest["scene"]))
    cameras = load_cameras(directory / manifest["cameras"])
    views = {}
    for key, files in manifest["views"].items():
        index = int(key)
        if index not in cameras:
            raise MissingInput(f"camera for view {index}")
        views[index] = ViewData(
            camera=cameras[index],
            rgb=load_rgb(directory / files["rgb"]),
            depth=load_depth(directory / files["depth"], directory / files["depth_valid"], scale),
            ids=load_ids(directory / files["ids"]),
            empty_rgb=load_rgb(directory / files["empty_rgb"]),
            empty_depth=load_depth(directory / files["empty_depth"], directory / files["empty_depth_valid"], scale),
        )
    return SyntheticDataset(scene=scene, views=dict(sorted(views.items())))


@dataclass(frozen=True)
class EmptySceneViews:
    """The cameras plus the object-free renders; what evaluation is allowed to read."""

    cameras: dict[int, Camera]
    rgb: dict[int, np.ndarray]
    depth: dict[int, np.ndarray]

    @property
    def view_indices(self) -> list[int]:
        return sorted(self.cameras)


def load_empty_scene(directory: PathLike) -> EmptySceneViews:
    """Read the empty-scene RGB and depth of a saved dataset, leaving the object renders untouched."""
    directory = Path(directory)
    manifest = load_manifest(directory)
    scale = float(manifest["depth_scale"])
    all_cameras = load_cameras(directory / manifest["cameras"])
    cameras, rgb, depth = {}, {}, {}
    for key, files in sorted(manifest["views"].items(), key=lambda item: int(item[0])):
        index = int(key)
        if index not in all_cameras:
            raise MissingInput(f"camera for view {index}")
        cameras[index] = all_cameras[index]
        rgb[index] = load_rgb(directory / files["empty_rgb"])
        depth[index] = load_depth(directory / files["empty_depth"], directory / files["empty_depth_valid"], scale)
    return EmptySceneViews(cameras=cameras, rgb=rgb, depth=depth)
