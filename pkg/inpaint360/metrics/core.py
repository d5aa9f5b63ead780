from prometheus_client import Counter, Gauge, Histogram


# Stage-level metrics, one label set per pipeline stage
METRIC_INFO = Gauge(
    'inpaint360_run_info',
    'Run information.',
    ['service_name', 'run_id'],
)

METRIC_STAGE_RUNS = Counter(
    'inpaint360_stage_runs_total',
    'Stage executions by stage and outcome (success, skipped, error).',
    ['stage', 'status'],
)

METRIC_STAGE_DURATION = Histogram(
    'inpaint360_stage_duration_seconds',
    'Histogram of stage wall-clock time (seconds).',
    ['stage', 'status'],
    buckets=[0.1, 0.5, 1.0, 5.0, 15.0, 60.0, 180.0, 600.0, 1800.0, 3600.0],
)

METRIC_STAGE_IN_PROGRESS = Gauge(
    'inpaint360_stage_in_progress',
    'Number of stages currently executing.',
    ['stage'],
)

METRIC_STAGE_MEMORY = Histogram(
    'inpaint360_stage_memory_bytes',
    'Peak traced Python heap above the stage start, in bytes.',
    ['stage', 'status'],
    buckets=[
        1048576,     # 1 MB
        10485760,    # 10 MB
        104857600,   # 100 MB
        1073741824,  # 1 GB
        4294967296,  # 4 GB
    ],
)
