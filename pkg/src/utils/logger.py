"""Logging for the torus observability laboratory.

Records carry the run they belong to (subcommand, seed, ...) in a ``run``
field, so log lines from worker threads of a sweep can be traced back to the
experiment that spawned them.
"""

import logging
import sys
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterator, Optional

DEFAULT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - [%(run)s] %(message)s"


class RunContextFilter(logging.Filter):
    """Stamp every record with the active run label ("-" outside a run)."""

    def __init__(self):
        super().__init__()
        self.label = "-"

    def filter(self, record: logging.LogRecord) -> bool:
        record.run = self.label
        return True


class Logger:
    """Console (stderr) and file logger with a per-run context label."""

    def __init__(
        self,
        name: str,
        log_dir: Optional[Path] = None,
        level: str = "INFO",
        console_enabled: bool = True,
        file_enabled: bool = True,
        fmt: str = DEFAULT_FORMAT,
    ):
        """
        Initialize logger.

        Args:
            name: Logger name, also the log file prefix
            log_dir: Directory for log files
            level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
            console_enabled: Enable console output on stderr
            file_enabled: Enable file output
            fmt: Record format; may use %(run)s
        """
        self.logger = logging.getLogger(name)
        self.logger.setLevel(getattr(logging, level.upper()))
        self.logger.handlers = []
        self.logger.propagate = False
        self.log_file: Optional[Path] = None
        self.context = RunContextFilter()

        formatter = logging.Formatter(fmt, datefmt="%Y-%m-%d %H:%M:%S")
        handlers = []
        if console_enabled:
            # stdout is reserved for reports and the rich summary
            handlers.append(logging.StreamHandler(sys.stderr))
        if file_enabled and log_dir:
            log_dir = Path(log_dir)
            log_dir.mkdir(parents=True, exist_ok=True)
            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
            self.log_file = log_dir / f"{name}_{timestamp}.log"
            handlers.append(logging.FileHandler(self.log_file))

        for handler in handlers:
            handler.setLevel(getattr(logging, level.upper()))
            handler.setFormatter(formatter)
            handler.addFilter(self.context)
            self.logger.addHandler(handler)

        if self.log_file:
            self.logger.info(f"Logging to file: {self.log_file}")

    @contextmanager
    def run_context(self, subcommand: str, **fields: Any) -> Iterator["Logger"]:
        """
        Label records emitted inside the block with the run they belong to.

        Fields whose value is None are left out of the label. Nested contexts
        restore the outer label on exit.
        """
        previous = self.context.label
        parts = [subcommand] + [f"{k}={v}" for k, v in fields.items() if v is not None]
        self.context.label = " ".join(parts)
        try:
            yield self
        finally:
            self.context.label = previous

    @property
    def run_label(self) -> str:
        return self.context.label

    def debug(self, message: str):
        self.logger.debug(message)

    def info(self, message: str):
        self.logger.info(message)

    def warning(self, message: str):
        self.logger.warning(message)

    def error(self, message: str, exc_info: bool = False):
        self.logger.error(message, exc_info=exc_info)

    def critical(self, message: str, exc_info: bool = False):
        self.logger.critical(message, exc_info=exc_info)

    def exception(self, message: str):
        self.logger.exception(message)


def setup_logger(name: str = "torusobs", config: Optional[Dict[str, Any]] = None) -> Logger:
    """
    Build a Logger from the ``logging`` section of a configuration dictionary.

    Args:
        name: Logger name
        config: Configuration dictionary (Config.to_dict())

    Returns:
        Logger instance
    """
    log_config = (config or {}).get("logging", {}) or {}
    file_enabled = log_config.get("file_enabled", True)

    log_dir = None
    if file_enabled:
        from .config import get_config

        log_dir = get_config().get_output_dir("logs_dir")

    return Logger(
        name=name,
        log_dir=log_dir,
        level=log_config.get("level", "INFO"),
        console_enabled=log_config.get("console_enabled", True),
        file_enabled=file_enabled,
        fmt=log_config.get("format", DEFAULT_FORMAT),
    )


_logger_instance: Optional[Logger] = None


def get_logger(name: str = "torusobs") -> Logger:
    """Process-wide logger, configured from get_config() on first use."""
    global _logger_instance
    if _logger_instance is None:
        from .config import get_config

        _logger_instance = setup_logger(name, get_config().to_dict())
    return _logger_instance


def reset_logger():
    """Drop the global logger so the next call re-reads configuration."""
    global _logger_instance
    _logger_instance = None
