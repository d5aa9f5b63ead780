import sys
from typing import Any, BinaryIO, Callable, Dict, Optional, TextIO, Union

import orjson
from loguru._handler import Message

from .settings import LoggingSettings

_ISO = "%Y-%m-%dT%H:%M:%S.%fZ"
# span ids have their own top-level fields
_UNLABELLED = frozenset({"trace_id", "span_id"})
_PLAIN = (str, int, float, bool, type(None))


def _labels(extra: Dict[str, Any]) -> Dict[str, Any]:
    return {k: v if isinstance(v, _PLAIN) else str(v) for k, v in extra.items() if k not in _UNLABELLED}


def _span_field(extra: Dict[str, Any], key: str) -> Optional[str]:
    value = extra.get(key, "N/A")
    return None if value == "N/A" else value


def _origin(record) -> Dict[str, Any]:
    return {
        "logger": record["name"],
        "module": record["module"],
        "origin": {
            "file": {"name": record["file"].name, "line": record["line"]},
            "function": record["function"],
        },
    }


def _process(record) -> Dict[str, Any]:
    proc, thread = record["process"], record["thread"]
    return {"pid": proc.id, "name": proc.name, "thread": {"id": thread.id, "name": thread.name}}


def build_record(message: Message, settings: LoggingSettings) -> Dict[str, Any]:
    """Shape a loguru record as an ECS document; stage and run labels land under ``labels``."""
    record = message.record
    extra = record["extra"]
    stamp = record["time"].strftime(_ISO)
    document: Dict[str, Any] = {
        "@timestamp": stamp,
        "level": record["level"].name.lower(),
        "message": record["message"],
        "labels": _labels(extra),
        "trace_id": _span_field(extra, "trace_id"),
        "span_id": _span_field(extra, "span_id"),
        "event": {"created": stamp, "duration": int(record["elapsed"].total_seconds() * 1e9)},
        "log": _origin(record),
        "process": _process(record),
        "service": {
            "environment": settings.environment,
            "name": settings.service_name,
            "version": settings.version,
        },
    }
    exception = record.get("exception")
    if exception is not None and exception.type is not None:
        document["error"] = {"type": exception.type.__name__, "message": str(exception.value)}
    return document


def json_sink(settings: LoggingSettings, stream: Optional[Union[BinaryIO, TextIO]] = None) -> Callable[[Message], None]:
    """
    Sink writing one JSON document per line to a binary stream, or to the
    byte buffer of a text stream. Without a stream the record goes to
    whatever ``sys.stdout`` is when it is emitted.
    """

    def sink(message: Message) -> None:
        out = stream if stream is not None else sys.stdout
        target = getattr(out, "buffer", out)
        target.write(orjson.dumps(build_record(message, settings)) + b"\n")
        out.flush()

    return sink
