"""
inpaint360.metrics

Prometheus collectors for pipeline stages and optimization loops, exported to a
text file per run.
"""

from .core import (
    METRIC_INFO,
    METRIC_STAGE_RUNS,
    METRIC_STAGE_DURATION,
    METRIC_STAGE_IN_PROGRESS,
    METRIC_STAGE_MEMORY,
)
from .custom import (
    LOSS,
    ITERATIONS_TOTAL,
    REFINE_PROMPTS_ADDED_TOTAL,
    REFINE_MEAN_MASK_AREA,
    NUMERICAL_FAILURES_TOTAL,
    EVAL_METRIC,
)
from .exporters import write_metrics, metrics_text

__all__ = [
    "METRIC_INFO",
    "METRIC_STAGE_RUNS",
    "METRIC_STAGE_DURATION",
    "METRIC_STAGE_IN_PROGRESS",
    "METRIC_STAGE_MEMORY",
    "LOSS",
    "ITERATIONS_TOTAL",
    "REFINE_PROMPTS_ADDED_TOTAL",
    "REFINE_MEAN_MASK_AREA",
    "NUMERICAL_FAILURES_TOTAL",
    "EVAL_METRIC",
    "write_metrics",
    "metrics_text",
]
