import io
from datetime import datetime, timedelta

import orjson

from inpaint360.inpaint360_logging.settings import LoggingSettings
from inpaint360.inpaint360_logging.sinks import build_record, json_sink


class DummyRecord(dict):
    def __getitem__(self, key):
        if key == "time":
            return datetime(2026, 6, 1, 12, 0, 0)
        if key == "elapsed":
            return timedelta(seconds=5)
        if key == "extra":
            return {"stage": "refine-masks", "trace_id": "abc", "span_id": "N/A", "shape": (2, 3)}
        if key == "level":
            class Level:
                name = "INFO"
            return Level()
        if key == "message":
            return "refinement round 1"
        if key == "file":
            class File:
                path = "/tmp/refine.py"
                name = "refine.py"
            return File()
        if key == "name":
            return "inpaint360.segment.refine"
        if key == "module":
            return "refine"
        if key == "line":
            return 99
        if key == "function":
            return "refine_depth_warp"
        if key == "process":
            class Proc:
                id = 123
                name = "proc"
            return Proc()
        if key == "thread":
            class Th:
                id = 999
                name = "Thread"
            return Th()
        return super().__getitem__(key)

    def get(self, key, default=None):
        return None if key == "exception" else default


class DummyMessage:
    def __init__(self):
        self.record = DummyRecord()


def test_json_sink_basic():
    stream = io.BytesIO()
    settings = LoggingSettings(environment="prd", service_name="svc", version="2.0")
    json_sink(settings, stream=stream)(DummyMessage())
    data = orjson.loads(stream.getvalue())
    assert data["@timestamp"].startswith("2026-06-01")
    assert data["message"] == "refinement round 1"
    assert data["service"] == {"environment": "prd", "name": "svc", "version": "2.0"}
    assert data["labels"]["stage"] == "refine-masks"
    assert data["labels"]["shape"] == "(2, 3)"
    assert "trace_id" not in data["labels"]
    assert data["trace_id"] == "abc"
    assert data["span_id"] is None
    assert data["event"]["duration"] == 5_000_000_000


def test_record_without_exception_has_no_error():
    assert "error" not in build_record(DummyMessage(), LoggingSettings())
