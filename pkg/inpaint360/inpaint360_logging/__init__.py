"""
inpaint360.inpaint360_logging

Structured logging for inpaint360 runs, built on loguru.
"""
from typing import Optional
from .core import setup_logger
from .settings import LoggingSettings


def get_logger(name: Optional[str] = None, **context):
    """
    Get a loguru logger bound with ``logger_name`` and any extra context.

    Example:
        logger = get_logger(__name__, stage="train")
        logger.info("iteration {} loss {:.4f}", 100, 0.0312)
    """
    from loguru import logger as _logger
    bound = _logger if name is None else _logger.bind(logger_name=name)
    return bound.bind(**context) if context else bound


__all__ = [
    "setup_logger",
    "get_logger",
    "LoggingSettings",
]
