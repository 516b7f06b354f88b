"""Logging configuration for the toolkit.

Standard output carries data (DOT, traces, JSON); every handler configured
here writes elsewhere.
"""

import logging
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional

PACKAGE_LOGGER = "src"

_TEXT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def _formatter(format_style: str, logger: logging.Logger) -> logging.Formatter:
    if format_style == "json":
        try:
            from pythonjsonlogger import jsonlogger

            return jsonlogger.JsonFormatter("%(asctime)s %(name)s %(levelname)s %(message)s")
        except ImportError:
            # Fallback to text format if pythonjsonlogger not available
            logger.warning("pythonjsonlogger not available, using text format")
    return logging.Formatter(_TEXT_FORMAT, datefmt="%Y-%m-%d %H:%M:%S")


def setup_logging(
    level: str = "INFO",
    log_file: Optional[Path] = None,
    format_style: str = "text",
    console_output: bool = True,
) -> logging.Logger:
    """
    Configure logging for the package.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Optional path to log file for persistent logs
        format_style: Format style ('text' or 'json')
        console_output: Whether to log to standard error

    Returns:
        Configured package logger
    """
    logger = logging.getLogger(PACKAGE_LOGGER)
    logger.setLevel(getattr(logging, level.upper(), logging.INFO))
    logger.propagate = False

    # Remove existing handlers to avoid duplicates
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    formatter = _formatter(format_style, logger)

    if console_output:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(getattr(logging, level.upper(), logging.INFO))
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

    if log_file:
        try:
            log_file = Path(log_file)
            log_file.parent.mkdir(parents=True, exist_ok=True)

            file_handler = logging.FileHandler(log_file, encoding="utf-8")
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)
            logger.debug(f"Logging to file: {log_file}")
        except OSError as e:
            logger.error(f"Failed to create file handler: {e}")

    if not logger.handlers:
        logger.addHandler(logging.NullHandler())

    logger.debug(f"Logging initialized at {level} level")
    return logger


class PerformanceLogger:
    """Collects wall-clock timings and logs a summary."""

    def __init__(self, logger: Optional[logging.Logger] = None):
        self.logger = logger or logging.getLogger(f"{PACKAGE_LOGGER}.performance")
        self.metrics: Dict[str, List[float]] = {}

    def record_metric(self, name: str, value: float):
        self.metrics.setdefault(name, []).append(value)

    def total(self, name: str) -> float:
        return sum(self.metrics.get(name, []))

    def log_metrics(self):
        """Log summary statistics for all metrics."""
        if not self.metrics:
            self.logger.info("No performance metrics recorded")
            return

        for name, values in self.metrics.items():
            if not values:
                continue
            avg = sum(values) / len(values)
            self.logger.info(
                f"Performance: {name} - avg={avg:.4f}s, min={min(values):.4f}s, "
                f"max={max(values):.4f}s, count={len(values)}"
            )

    def clear_metrics(self):
        self.metrics = {}


class TimingContext:
    """Context manager that records the duration of its block."""

    def __init__(self, perf_logger: PerformanceLogger, name: str):
        self.perf_logger = perf_logger
        self.name = name
        self.start_time: Optional[float] = None
        self.elapsed = 0.0

    def __enter__(self):
        self.start_time = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.elapsed = time.perf_counter() - self.start_time
        self.perf_logger.record_metric(self.name, self.elapsed)
        return False


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger under the package namespace.

    Args:
        name: Short component name (``"cli"``) or a dotted module path

    Returns:
        Logger instance
    """
    if name == PACKAGE_LOGGER or name.startswith(PACKAGE_LOGGER + "."):
        return logging.getLogger(name)
    return logging.getLogger(f"{PACKAGE_LOGGER}.{name}")
