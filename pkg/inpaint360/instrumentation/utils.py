"""Traced-heap measurement for stage instrumentation."""

import tracemalloc
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator, Optional


@dataclass(frozen=True)
class MemorySample:
    delta: int  # bytes still held when the block ends
    peak: int   # highest traced usage above the starting point


class MemoryProfiler:
    """
    Measures a block with tracemalloc. numpy registers its buffers with
    tracemalloc, so voxel grids and ray batches are counted.

    Tracing started here is stopped when the block ends; tracing that was
    already running (``python -X tracemalloc``) is left on.
    """

    def __init__(self, enabled: bool = True):
        self.enabled = enabled
        self.sample: Optional[MemorySample] = None

    @contextmanager
    def measure(self) -> Iterator["MemoryProfiler"]:
        if not self.enabled:
            yield self
            return
        owns_tracing = not tracemalloc.is_tracing()
        if owns_tracing:
            tracemalloc.start()
        tracemalloc.reset_peak()
        baseline, _ = tracemalloc.get_traced_memory()
        try:
            yield self
        finally:
            current, peak = tracemalloc.get_traced_memory()
            self.sample = MemorySample(
                delta=max(0, current - baseline),
                peak=max(0, peak - baseline),
            )
            if owns_tracing:
                tracemalloc.stop()

    def get_memory_delta(self) -> Optional[int]:
        return None if self.sample is None else self.sample.delta

    def get_memory_peak(self) -> Optional[int]:
        return None if self.sample is None else self.sample.peak
