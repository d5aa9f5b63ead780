"""
Optimization metrics: losses, iteration counters, refinement and failure counts.
"""

from prometheus_client import Counter, Gauge

LOSS = Gauge(
    "inpaint360_loss",
    "Most recent value of a loss component.",
    ["stage", "component"],
)

ITERATIONS_TOTAL = Counter(
    "inpaint360_iterations_total",
    "Optimizer iterations executed.",
    ["stage"],
)

REFINE_PROMPTS_ADDED_TOTAL = Counter(
    "inpaint360_refine_prompts_added_total",
    "Warped point prompts added by depth-warping refinement.",
)

REFINE_MEAN_MASK_AREA = Gauge(
    "inpaint360_refine_mean_mask_area_pixels",
    "Mean union-mask area after the latest refinement round.",
)

NUMERICAL_FAILURES_TOTAL = Counter(
    "inpaint360_numerical_failures_total",
    "Non-finite losses or gradients detected.",
    ["stage"],
)

EVAL_METRIC = Gauge(
    "inpaint360_eval_metric",
    "Aggregate evaluation metric per variant.",
    ["variant", "metric"],
)
