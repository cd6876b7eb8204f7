# Irregularity Profiler - Logging
# Structured logging with structlog; diagnostics always go to stderr

import logging
import sys
from typing import Optional, TextIO

import structlog


def _stderr_logger(*args) -> structlog.PrintLogger:
    # looked up per logger so a replaced sys.stderr is honoured
    return structlog.PrintLogger(file=sys.stderr)


def configure_logging(level: str = "INFO", fmt: str = "json", stream: Optional[TextIO] = None) -> None:
    """Configure structlog for the process.

    stdout carries data output only, so the renderer writes to stderr
    unless a stream is given explicitly.
    """
    renderer = (
        structlog.processors.JSONRenderer(sort_keys=True)
        if fmt == "json"
        else structlog.dev.ConsoleRenderer(colors=False)
    )

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso", utc=True),
            structlog.processors.format_exc_info,
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(
            getattr(logging, level.upper(), logging.INFO)
        ),
        logger_factory=structlog.PrintLoggerFactory(file=stream) if stream is not None else _stderr_logger,
        cache_logger_on_first_use=False,
    )
