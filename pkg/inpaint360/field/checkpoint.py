"""
Versioned binary checkpoints.

Layout: ``b"I360CKPT"`` magic, little-endian uint32 format version, uint32
header length, a JSON header (kind, named array shapes, free metadata), then
each array as raw little-endian float32 in header order. The same container
holds radiance fields and denoisers.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Any, Mapping, Union

import numpy as np
import orjson

from inpaint360.errors import ConfigError, MissingInput
from .grid import RadianceField

MAGIC = b"I360CKPT"
FORMAT_VERSION = 1
_PREAMBLE = struct.Struct("<8sII")
_FLOAT = np.dtype("<f4")


def save_checkpoint(path: Union[str, Path], kind: str, arrays: Mapping[str, np.ndarray], meta: Mapping[str, Any] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "kind": kind,
        "meta": dict(meta or {}),
        "arrays": [{"name": name, "shape": list(arr.shape), "count": int(arr.size)} for name, arr in arrays.items()],
    }
    header_bytes = orjson.dumps(header, option=orjson.OPT_SORT_KEYS)
    with path.open("wb") as fh:
        fh.write(_PREAMBLE.pack(MAGIC, FORMAT_VERSION, len(header_bytes)))
        fh.write(header_bytes)
        for arr in arrays.values():
            fh.write(np.ascontiguousarray(arr, dtype=_FLOAT).tobytes())
    return path


def load_checkpoint(path: Union[str, Path], kind: str) -> tuple[dict, dict[str, np.ndarray]]:
    path = Path(path)
    if not path.exists():
        raise MissingInput(str(path))
    blob = path.read_bytes()
    magic, version, header_len = _PREAMBLE.unpack_from(blob, 0)
    if magic != MAGIC:
        raise ConfigError(f"{path} is not an inpaint360 checkpoint")
    if version != FORMAT_VERSION:
        raise ConfigError(f"{path}: unsupported checkpoint version {version}")
    offset = _PREAMBLE.size
    header = orjson.loads(blob[offset:offset + header_len])
    if header["kind"] != kind:
        raise ConfigError(f"{path} holds a '{header['kind']}', expected '{kind}'")
    offset += header_len
    arrays = {}
    for entry in header["arrays"]:
        count = entry["count"]
        data = np.frombuffer(blob, dtype=_FLOAT, count=count, offset=offset)
        arrays[entry["name"]] = data.astype(np.float32).reshape(entry["shape"])
        offset += count * _FLOAT.itemsize
    if offset != len(blob):
        raise ConfigError(f"{path}: {len(blob) - offset} trailing bytes after the last array")
    return header, arrays


def save_field(field: RadianceField, path: Union[str, Path]) -> Path:
    return save_checkpoint(
        path,
        "radiance_field",
        {"density": field.density_param, "color": field.color_param},
        meta={"resolution": field.resolution, "aabb": field.aabb.tolist()},
    )


def load_field(path: Union[str, Path]) -> RadianceField:
    header, arrays = load_checkpoint(path, "radiance_field")
    meta = header["meta"]
    field = RadianceField(meta["resolution"], meta["aabb"], dtype=np.float32)
    field.density_param[...] = arrays["density"]
    field.color_param[...] = arrays["color"]
    return field
