import os
from pathlib import Path
from typing import Any, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator


def _load_nearest_dotenv() -> None:
    here = Path(".").resolve()
    for parent in (here, *here.parents):
        candidate = parent / ".env"
        if candidate.exists():
            load_dotenv(candidate)
            return


_load_nearest_dotenv()

TRACE_EXPORTERS = ("none", "console", "otlp")
_PRD_ALIASES = frozenset({"prd", "prod", "production"})


def _env(name: str, default: str) -> Any:
    return Field(default_factory=lambda: os.getenv(name, default))


def _env_flag(name: str, default: bool) -> Any:
    return Field(default_factory=lambda: os.getenv(name, str(default)).strip().lower() == "true")


def _env_optional_int(name: str) -> Any:
    return Field(default_factory=lambda: os.getenv(name) or None)


class Inpaint360Settings(BaseModel):
    """
    Process-level settings for inpaint360.

    Everything here shapes how a run is observed (logs, metrics, traces,
    parallelism), never what it computes. Numerical knobs live in the
    pipeline config document. Environment variables are read when an
    instance is created.
    """

    log_level: str = _env("INPAINT360_LOG_LEVEL", "INFO")
    environment: str = _env("INPAINT360_ENVIRONMENT", "dev")
    service_name: str = _env("INPAINT360_SERVICE_NAME", "inpaint360")
    version: str = _env("INPAINT360_VERSION", "0.3.0")
    # None defers to the run config
    workers: Optional[int] = _env_optional_int("INPAINT360_WORKERS")

    metrics_enabled: bool = _env_flag("INPAINT360_METRICS_ENABLED", True)
    metrics_filename: str = _env("INPAINT360_METRICS_FILENAME", "metrics.prom")

    trace_exporter: str = _env("INPAINT360_TRACE_EXPORTER", "none")
    otlp_exporter_protocol: str = _env("OTEL_EXPORTER_OTLP_PROTOCOL", "grpc")
    otlp_exporter_host: str = _env("OTEL_EXPORTER_OTLP_ENDPOINT", "localhost")
    otlp_exporter_port: int = _env("OTEL_EXPORTER_OTLP_PORT", "4317")
    otlp_exporter_http_encrypted: bool = _env_flag("OTEL_EXPORTER_OTLP_HTTP_ENCRYPTED", False)
    trace_sampler: str = _env("OTEL_TRACES_SAMPLER", "always_on")
    trace_sampling_ratio: float = _env("OTEL_TRACES_SAMPLER_ARG", "1.0")

    # tracemalloc roughly doubles the cost of the numpy-heavy stages
    enable_memory_profiling: bool = _env_flag("INPAINT360_ENABLE_MEMORY_PROFILING", False)
    sampling_memory_profiling: float = _env("INPAINT360_SAMPLING_MEMORY_PROFILING", "1.0")

    model_config = ConfigDict(validate_default=True)

    @field_validator("workers")
    @classmethod
    def _positive_workers(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value < 1:
            raise ValueError("workers must be at least 1")
        return value

    @field_validator("trace_exporter")
    @classmethod
    def _known_exporter(cls, value: str) -> str:
        value = (value or "none").strip().lower()
        if value not in TRACE_EXPORTERS:
            raise ValueError(f"trace exporter must be one of {', '.join(TRACE_EXPORTERS)}")
        return value

    @field_validator("trace_sampling_ratio", "sampling_memory_profiling")
    @classmethod
    def _unit_interval(cls, value: float) -> float:
        if not 0.0 <= value <= 1.0:
            raise ValueError("sampling ratios lie in [0, 1]")
        return value

    @property
    def environment_effective(self) -> str:
        """'prd', 'unittest' or 'dev'; staging, qa and anything unknown run as 'dev'."""
        env = (self.environment or "").strip().lower()
        if env in _PRD_ALIASES:
            return "prd"
        return "unittest" if env == "unittest" else "dev"

    @property
    def service_name_composed(self) -> str:
        return f"{self.environment_effective}-{self.service_name}"

    @property
    def is_production(self) -> bool:
        return self.environment_effective == "prd"

    @property
    def otlp_endpoint_full(self) -> str:
        address = f"{self.otlp_exporter_host}:{self.otlp_exporter_port}"
        if self.otlp_exporter_protocol.lower() == "grpc":
            return address
        return f"{'https' if self.otlp_exporter_http_encrypted else 'http'}://{address}"

    def __str__(self):
        workers = self.workers if self.workers is not None else "config"
        return f"[{self.environment}] {self.service_name} v{self.version} ({self.log_level}, workers={workers})"
