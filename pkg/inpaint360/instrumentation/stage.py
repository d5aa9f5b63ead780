"""Per-stage span, Prometheus series and optional heap measurement."""

import random
import time
from collections.abc import Callable
from functools import wraps
from typing import Optional

from opentelemetry import trace
from opentelemetry.trace import Span, Status, StatusCode

from inpaint360.errors import Inpaint360Error
from inpaint360.instrumentation.utils import MemoryProfiler
from inpaint360.metrics.core import (
    METRIC_STAGE_DURATION,
    METRIC_STAGE_IN_PROGRESS,
    METRIC_STAGE_MEMORY,
    METRIC_STAGE_RUNS,
)
from inpaint360.settings import Inpaint360Settings

SKIPPED = "skipped"


def _profiler_for(settings: Inpaint360Settings) -> MemoryProfiler:
    sampled = settings.enable_memory_profiling and random.random() < settings.sampling_memory_profiling
    return MemoryProfiler(enabled=sampled)


def _record_outcome(span: Span, stage: str, status: str, elapsed: float, profiler: MemoryProfiler) -> None:
    METRIC_STAGE_RUNS.labels(stage=stage, status=status).inc()
    METRIC_STAGE_DURATION.labels(stage=stage, status=status).observe(elapsed)
    peak = profiler.get_memory_peak()
    if peak is not None:
        METRIC_STAGE_MEMORY.labels(stage=stage, status=status).observe(peak)
    if not span.is_recording():
        return
    span.set_attribute("inpaint360.stage", stage)
    span.set_attribute("inpaint360.status", status)
    span.set_attribute("inpaint360.duration_s", elapsed)
    if peak is not None:
        span.set_attribute("memory.peak_bytes", peak)
        span.set_attribute("memory.delta_bytes", profiler.get_memory_delta())


def stage_instrumentation(stage: str, settings: Optional[Inpaint360Settings] = None):
    """
    Wrap a stage body in a ``stage.<name>`` span and count it in the stage
    series. A body returning ``"skipped"`` is recorded as a resumed stage.
    """
    settings = settings or Inpaint360Settings()

    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            tracer = trace.get_tracer(f"inpaint360.{func.__module__}")
            profiler = _profiler_for(settings)
            status = "error"
            started = time.perf_counter()
            in_progress = METRIC_STAGE_IN_PROGRESS.labels(stage=stage)
            in_progress.inc()
            with tracer.start_as_current_span(f"stage.{stage}") as span:
                try:
                    with profiler.measure():
                        result = func(*args, **kwargs)
                    status = SKIPPED if result == SKIPPED else "success"
                    span.set_status(Status(StatusCode.OK))
                    return result
                except Exception as exc:
                    span.record_exception(exc)
                    span.set_status(Status(StatusCode.ERROR, description=str(exc)))
                    if isinstance(exc, Inpaint360Error) and span.is_recording():
                        span.set_attribute("inpaint360.exit_code", exc.exit_code)
                    raise
                finally:
                    in_progress.dec()
                    _record_outcome(span, stage, status, time.perf_counter() - started, profiler)

        return wrapper

    return decorator
