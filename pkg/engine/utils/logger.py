"""
Logging utilities for the engine.

This module provides centralized logging configuration and helper
functions for logging run events, command calls and failures.
"""

import logging
from functools import wraps

from config import LOG_FILE, LOG_LEVEL


def setup_logger(name: str, log_file: str = LOG_FILE, level: str = LOG_LEVEL) -> logging.Logger:
    """
    Set up and configure a logger.

    Args:
        name: Name of the logger (usually __name__)
        log_file: Path to log file; empty string disables the file handler
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, level.upper(), logging.INFO))

    # Prevent duplicate handlers
    if logger.handlers:
        return logger

    file_formatter = logging.Formatter(
        '%(asctime)s | %(name)s | %(levelname)s | %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    console_formatter = logging.Formatter(
        '%(levelname)s: %(message)s'
    )

    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(file_formatter)
        logger.addHandler(file_handler)

    # Console handler goes to stderr so stdout stays machine-readable
    console_handler = logging.StreamHandler()
    console_handler.setLevel(logging.INFO)
    console_handler.setFormatter(console_formatter)
    logger.addHandler(console_handler)

    return logger


def format_fields(**fields) -> str:
    """Render keyword fields as a stable ` | key=value` suffix (keys sorted)."""
    parts = []
    for key in sorted(fields):
        value = fields[key]
        if isinstance(value, float):
            value = f"{value:.6g}"
        parts.append(f"{key}={value}")
    return "".join(f" | {part}" for part in parts)


def log_run_event(logger: logging.Logger, event_type: str, **fields) -> None:
    """
    Log a finished computation as one structured line.

    Args:
        logger: Logger instance
        event_type: Type of event (e.g., 'orbit_done', 'attractor_done')
        **fields: Key/value details; rendered sorted by key
    """
    logger.info(f"RUN EVENT: {event_type}{format_fields(**fields)}")


def log_command(logger: logging.Logger):
    """
    Decorator to log CLI subcommand calls.

    Args:
        logger: Logger instance

    Returns:
        Decorated function
    """
    def decorator(f):
        @wraps(f)
        def decorated_function(*args, **kwargs):
            logger.info(f"Command: {f.__name__}{format_fields(**{k: v for k, v in kwargs.items() if v is not None})}")

            try:
                return f(*args, **kwargs)
            except Exception as e:
                logger.error(f"Error in {f.__name__}: {str(e)}")
                raise

        return decorated_function
    return decorator
