import logging
import sys
from pathlib import Path
from typing import IO, Any, Dict, List, Optional, Union

from loguru import logger
from opentelemetry.trace import format_span_id, format_trace_id, get_current_span

from ..settings import Inpaint360Settings
from .settings import LoggingSettings
from .sinks import json_sink

_HUMAN_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</green> | "
    "<level>{level: <8}</level> | "
    "<cyan>{name}:{function}:{line}</cyan> | "
    "<yellow>stage={extra[stage]}</yellow> | "
    "<yellow>trace_id={extra[trace_id]}</yellow> | "
    "<level>{message}</level>"
)

# the run log handle owned by the current configuration
_run_log: Optional[IO[bytes]] = None


class PropagateToLogging(logging.Handler):
    """Hands loguru records to stdlib logging so pytest's caplog sees them."""

    def emit(self, record: logging.LogRecord) -> None:
        logging.getLogger(record.name).handle(record)


class InterceptHandler(logging.Handler):
    """Routes stdlib logging (PIL, opentelemetry internals) into loguru."""

    def emit(self, record: logging.LogRecord) -> None:
        try:
            level: Union[str, int] = logger.level(record.levelname).name
        except ValueError:
            level = record.levelno
        frame, depth = logging.currentframe(), 2
        while frame and frame.f_code.co_filename == logging.__file__:
            frame = frame.f_back
            depth += 1
        logger.opt(depth=depth, exception=record.exc_info).log(level, record.getMessage())


def trace_context_filter(record) -> bool:
    """Stamp the active span ids and a default stage label on every record."""
    extra = record["extra"]
    ctx = get_current_span().get_span_context()
    if ctx.is_valid:
        extra["trace_id"] = format_trace_id(ctx.trace_id)
        extra["span_id"] = format_span_id(ctx.span_id)
    else:
        extra["trace_id"] = extra["span_id"] = "N/A"
    extra.setdefault("stage", "-")
    return True


def _coerce_settings(settings: Union[LoggingSettings, Inpaint360Settings, None]) -> LoggingSettings:
    if settings is None:
        return LoggingSettings()
    if isinstance(settings, Inpaint360Settings):
        return LoggingSettings.from_settings(settings)
    return settings


def _console_sinks(settings: LoggingSettings) -> List[Dict[str, Any]]:
    human = {"sink": sys.stderr, "format": _HUMAN_FORMAT, "diagnose": False}
    if settings.environment == "unittest":
        return [{"sink": PropagateToLogging()}, {**human, "colorize": False}]
    if settings.environment == "dev":
        return [{**human, "colorize": True}]
    return [{"sink": json_sink(settings), "backtrace": True}]


def _open_run_log(path: str) -> IO[bytes]:
    global _run_log
    if _run_log is not None and not _run_log.closed:
        _run_log.close()
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    _run_log = open(path, "ab")
    return _run_log


def setup_logger(
    settings: Union[LoggingSettings, Inpaint360Settings, None] = None,
    run_log_path: Optional[str] = None,
) -> None:
    """
    Configure loguru for inpaint360.

    The console sink depends on the environment: ``dev`` prints coloured
    lines to stderr, ``unittest`` prints plain lines and also feeds stdlib
    logging, anything production-like writes JSON documents to stdout.
    With ``run_log_path`` (or ``settings.run_log_path``) every record is
    also appended there as one JSON line. Calling this again replaces the
    previous configuration.
    """
    settings = _coerce_settings(settings)
    log_path = run_log_path or settings.run_log_path

    sinks = _console_sinks(settings)
    logger.remove()
    if log_path:
        sinks.append({"sink": json_sink(settings, stream=_open_run_log(log_path))})
    for options in sinks:
        logger.add(level=settings.log_level, catch=True, filter=trace_context_filter, **options)

    # records already flow loguru -> logging under unittest; intercepting back would loop
    if settings.environment != "unittest":
        root = logging.getLogger()
        if not any(isinstance(h, InterceptHandler) for h in root.handlers):
            logging.basicConfig(handlers=[InterceptHandler()], level=logging.WARNING, force=True)
