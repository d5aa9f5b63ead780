"""Camera file: one JSON document per scene, views keyed by index."""

from pathlib import Path
from typing import Mapping, Union

import orjson

from inpaint360.errors import ConfigError, MissingInput
from .camera import Camera

CAMERA_FILE_VERSION = 1


def cameras_to_document(cameras: Mapping[int, Camera]) -> dict:
    views = {}
    for index in sorted(cameras):
        cam = cameras[index]
        views[str(index)] = {
            "width": cam.width,
            "height": cam.height,
            "fx": float(cam.focal_x),
            "fy": float(cam.focal_y),
            "cx": float(cam.principal_x),
            "cy": float(cam.principal_y),
            "cam_to_world": [float(x) for x in cam.cam_to_world.reshape(-1)],
        }
    return {"version": CAMERA_FILE_VERSION, "views": views}


def cameras_from_document(document: dict) -> dict[int, Camera]:
    if document.get("version") != CAMERA_FILE_VERSION:
        raise ConfigError(f"unsupported camera file version {document.get('version')!r}")
    cameras = {}
    for key, entry in document["views"].items():
        matrix = entry["cam_to_world"]
        if len(matrix) != 16:
            raise ConfigError(f"view {key}: cam_to_world needs 16 entries, got {len(matrix)}")
        cameras[int(key)] = Camera(
            width=int(entry["width"]),
            height=int(entry["height"]),
            focal_x=entry["fx"],
            focal_y=entry["fy"],
            principal_x=entry["cx"],
            principal_y=entry["cy"],
            cam_to_world=matrix,
        )
    return dict(sorted(cameras.items()))


def save_cameras(path: Union[str, Path], cameras: Mapping[int, Camera]) -> Path:
    """Write the camera file. orjson emits shortest round-trip floats, so reload is bit-exact."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(orjson.dumps(cameras_to_document(cameras), option=orjson.OPT_INDENT_2))
    return path


def load_cameras(path: Union[str, Path]) -> dict[int, Camera]:
    path = Path(path)
    if not path.exists():
        raise MissingInput(str(path))
    return cameras_from_document(orjson.loads(path.read_bytes()))
