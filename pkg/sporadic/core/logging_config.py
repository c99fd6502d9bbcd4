"""Structured logging configuration and run context utilities.

This module configures JSON logging and provides run-scoped context using
contextvars so log lines from ingest, training and evaluation can be
correlated with the run that produced them.

Fields included in every log entry:
- timestamp: ISO-8601 UTC
- level: log level name
- logger: logger name
- message: formatted message
- run_id: digest-derived identifier of the active run configuration
- command: CLI subcommand when invoked from the command line
- module, function, line: source location
- any structured values passed through ``extra=``
"""

from __future__ import annotations

import json
import logging
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from contextvars import ContextVar
from datetime import UTC, datetime
from typing import Any

run_id_var: ContextVar[str | None] = ContextVar("run_id", default=None)
command_var: ContextVar[str | None] = ContextVar("command", default=None)

# LogRecord attributes that are not user supplied ``extra`` values
_RESERVED = set(vars(logging.makeLogRecord({}))) | {"message", "asctime", "run_id", "command"}


def get_run_id() -> str | None:
    return run_id_var.get()


def get_command() -> str | None:
    return command_var.get()


class ContextFilter(logging.Filter):
    """Inject contextvars into LogRecord attributes."""

    def filter(self, record: logging.LogRecord) -> bool:  # noqa: D401 - pydocstyle noise
        record.run_id = get_run_id() or ""
        record.command = get_command() or ""
        return True


class JsonFormatter(logging.Formatter):
    """Render log records as JSON lines."""

    def format(self, record: logging.LogRecord) -> str:  # noqa: D401 - pydocstyle noise
        payload: dict[str, Any] = {
            "timestamp": datetime.now(UTC).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
            "run_id": getattr(record, "run_id", ""),
            "command": getattr(record, "command", ""),
        }
        for key, value in vars(record).items():
            if key not in _RESERVED and not key.startswith("_"):
                payload[key] = value

        if record.exc_info:
            payload["exc_type"] = record.exc_info[0].__name__ if record.exc_info[0] else None
            payload["exc_message"] = str(record.exc_info[1]) if record.exc_info[1] else None
            payload["exc_stack"] = self.formatException(record.exc_info)

        return json.dumps(payload, ensure_ascii=False, default=str)


@contextmanager
def use_run_context(*, run_id: str | None = None, command: str | None = None) -> Iterator[None]:
    """Temporarily set run-scoped context; previous values are restored on exit."""
    tokens: list[tuple[ContextVar[str | None], Any]] = []
    try:
        if run_id is not None:
            tokens.append((run_id_var, run_id_var.set(run_id)))
        if command is not None:
            tokens.append((command_var, command_var.set(command)))
        yield
    finally:
        for var, token in reversed(tokens):
            var.reset(token)


def configure_logging(level: str | None = None, *, json_lines: bool | None = None) -> None:
    """Configure the root logger.

    Idempotent: existing handlers are replaced, never stacked.
    """
    from .config import settings

    level_value = logging.getLevelName((level or settings.log_level).upper())
    if not isinstance(level_value, int):
        level_value = logging.INFO
    use_json = settings.log_json if json_lines is None else json_lines

    root = logging.getLogger()
    root.setLevel(level_value)
    for h in list(root.handlers):
        root.removeHandler(h)

    handler = logging.StreamHandler(stream=sys.stderr)
    handler.setLevel(level_value)
    handler.addFilter(ContextFilter())
    if use_json:
        handler.setFormatter(JsonFormatter())
    else:
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s [%(run_id)s] %(message)s"))
    root.addHandler(handler)
