from typing import Optional

from pydantic import BaseModel, field_validator

from ..settings import Inpaint360Settings


class LoggingSettings(BaseModel):
    """
    What ``setup_logger`` needs to know: threshold, environment (``dev``,
    ``unittest`` or a production name), the service identity stamped on
    JSON records, and an optional run log path.
    """

    log_level: str = "INFO"
    environment: str = "dev"
    service_name: str = "inpaint360"
    version: str = "0.1.0"
    run_log_path: Optional[str] = None

    @field_validator("log_level")
    @classmethod
    def _upper_level(cls, value: str) -> str:
        return value.strip().upper()

    @classmethod
    def from_settings(cls, settings: Inpaint360Settings, run_log_path: Optional[str] = None) -> "LoggingSettings":
        return cls(
            log_level=settings.log_level,
            environment=settings.environment_effective,
            service_name=settings.service_name,
            version=settings.version,
            run_log_path=run_log_path,
        )

    @property
    def service_name_composed(self) -> str:
        if not (self.environment and self.service_name):
            return "-"
        return f"{self.environment}-{self.service_name}"
