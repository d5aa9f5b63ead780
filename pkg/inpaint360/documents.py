"""JSON documents (manifests, reports, prompt files) written the same way everywhere."""

from pathlib import Path
from typing import Any, Union

import orjson

from inpaint360.errors import ConfigError, MissingInput

JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY


def dumps(document: Any) -> bytes:
    return orjson.dumps(document, option=JSON_OPTIONS)


def write_json(path: Union[str, Path], document: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps(document))
    return path


def read_json(path: Union[str, Path]) -> Any:
    path = Path(path)
    if not path.exists():
        raise MissingInput(str(path))
    try:
        return orjson.loads(path.read_bytes())
    except orjson.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
