"""
structlog setup: one JSON object per line on stderr. stdout is reserved for
the certificate or report a command prints.
"""
import logging
import sys

import structlog

LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def configure_logging(log_level: str = "INFO"):
    level = log_level.upper()
    if level not in LEVELS:
        raise ValueError(f"unknown log level {log_level!r}")
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.JSONRenderer(),
        ],
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        wrapper_class=structlog.make_filtering_bound_logger(logging.getLevelName(level)),
        cache_logger_on_first_use=True,
    )


def bind_run(command: str, config_hash: str):
    """Tag every later event of this run with its command and config hash."""
    structlog.contextvars.clear_contextvars()
    structlog.contextvars.bind_contextvars(command=command, config_hash=config_hash)


def get_logger(name: str):
    return structlog.get_logger(name)
