"""
Logger Configuration for hyperwitness
=====================================

Centralized logging configuration with consistent formatting and optional
file rotation. Console output goes to stderr: stdout is reserved for the
JSON and CSV artifacts the CLI emits.
"""

import logging
import logging.handlers
import os
import sys
from typing import Optional

PACKAGE_LOGGER = "hyperwitness"

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def _resolve_level(level: Optional[str]) -> int:
    if level is None:
        level = os.getenv("HYPERWITNESS_LOG_LEVEL") or os.getenv("LOG_LEVEL", "INFO")
    resolved = logging.getLevelName(level.upper())
    return resolved if isinstance(resolved, int) else logging.INFO


def setup_logger(
    name: str,
    level: Optional[str] = None,
    log_file: Optional[str] = None,
    console_output: bool = True,
    file_output: bool = False,
) -> logging.Logger:
    """
    Setup a logger with consistent formatting and handlers.

    Args:
        name: Logger name (usually the package name)
        level: Log level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Log file path, required when file_output is set
        console_output: Whether to output to stderr
        file_output: Whether to output to a rotating file

    Returns:
        Configured logger instance
    """
    numeric_level = _resolve_level(level)

    logger = logging.getLogger(name)
    logger.setLevel(numeric_level)

    # Avoid duplicate handlers
    if logger.handlers:
        for handler in logger.handlers:
            handler.setLevel(numeric_level)
        if file_output and log_file and not _has_file_handler(logger, log_file):
            logger.addHandler(_file_handler(log_file, numeric_level))
        return logger

    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

    if console_output:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(numeric_level)
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

    if file_output and log_file:
        logger.addHandler(_file_handler(log_file, numeric_level))

    return logger


def _file_handler(log_file: str, level: int) -> logging.Handler:
    log_dir = os.path.dirname(os.path.abspath(log_file))
    os.makedirs(log_dir, exist_ok=True)

    # Rotating file handler (10MB max, keep 5 files)
    handler = logging.handlers.RotatingFileHandler(
        log_file, maxBytes=10 * 1024 * 1024, backupCount=5
    )
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
    return handler


def _has_file_handler(logger: logging.Logger, log_file: str) -> bool:
    target = os.path.abspath(log_file)
    return any(
        isinstance(h, logging.handlers.RotatingFileHandler) and h.baseFilename == target
        for h in logger.handlers
    )


def get_logger(name: str, level: Optional[str] = None) -> logging.Logger:
    """
    Get a logger for a hyperwitness module.

    Module loggers carry no handlers of their own; they propagate to the
    package logger configured by configure_package_logging.

    Args:
        name: Logger name (usually __name__)
        level: Optional log level override for this logger

    Returns:
        Logger instance
    """
    logger = logging.getLogger(name)
    if level is not None:
        logger.setLevel(_resolve_level(level))
    return logger


def set_level(level: str, log_file: Optional[str] = None) -> None:
    """Change the package log level at runtime (CLI --log-level), optionally adding a log file."""
    setup_logger(PACKAGE_LOGGER, level, log_file=log_file, file_output=bool(log_file))


def configure_package_logging() -> logging.Logger:
    """Configure logging for the entire hyperwitness package."""
    log_file = os.getenv("HYPERWITNESS_LOG_FILE")
    root_logger = setup_logger(
        PACKAGE_LOGGER, log_file=log_file, file_output=bool(log_file)
    )
    return root_logger


# Auto-configure when module is imported
configure_package_logging()
