"""
inpaint360.tracing

OpenTelemetry tracing for pipeline runs: one span per stage, child spans for
the heavy optimization phases.
"""
from opentelemetry import trace as _trace
from opentelemetry.sdk.trace import TracerProvider

from .core import setup_tracer, setup_tracer_from_settings

__all__ = [
    "setup_tracer",
    "setup_tracer_from_settings",
    "get_tracer",
    "shutdown_tracing",
]


def get_tracer(name: str = __name__) -> _trace.Tracer:
    return _trace.get_tracer(name)


def shutdown_tracing() -> None:
    """Flush and close the installed span processors before the process exits."""
    provider = _trace.get_tracer_provider()
    if isinstance(provider, TracerProvider):
        provider.shutdown()
