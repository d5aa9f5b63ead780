"""
inpaint360.instrumentation

Decorators and guards tying stages to tracing, metrics and numerical checks.
"""

from .stage import stage_instrumentation
from .guards import NumericalGuard
from .utils import MemoryProfiler

__all__ = [
    "stage_instrumentation",
    "NumericalGuard",
    "MemoryProfiler",
]
