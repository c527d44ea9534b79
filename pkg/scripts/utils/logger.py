"""Simple structured logger writing JSON lines to data/logs.txt"""
from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path
import json
import logging
import os
import sys
import threading

_BASE = Path(__file__).resolve().parents[2]
_DEFAULT_LOG_FILE = _BASE / "data" / "logs.txt"
_LOCK = threading.Lock()

_LEVELS = {"DEBUG": 10, "INFO": 20, "WARNING": 30, "ERROR": 40, "CRITICAL": 50, "OFF": 100}


def _ts() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def _log_file() -> Path:
    # resolved per call so tests can point SALTOS_LOG_FILE somewhere else
    raw = os.getenv("SALTOS_LOG_FILE")
    path = Path(raw) if raw else _DEFAULT_LOG_FILE
    if not path.is_absolute():
        path = _BASE / path
    return path


def _console_threshold() -> int:
    name = (os.getenv("SALTOS_CONSOLE_LEVEL") or "OFF").upper()
    return _LEVELS.get(name, _LEVELS["OFF"])


def log(component: str, level: str, message: str, **extra):
    """Append a structured log line."""
    payload = {
        "ts": _ts(),
        "component": component,
        "level": level.upper(),
        "msg": message,
    }
    if extra:
        payload["extra"] = extra
    line = json.dumps(payload, ensure_ascii=False, default=str)
    path = _log_file()
    with _LOCK:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
        except OSError:
            # read-only checkouts still get the stderr echo below
            pass
    if _LEVELS.get(payload["level"], 20) >= _console_threshold():
        print(f"[{payload['level']}] {component}: {message}", file=sys.stderr)


class _JsonLinesHandler(logging.Handler):
    """Routes stdlib records through ``log`` so both APIs share one sink."""

    def emit(self, record: logging.LogRecord) -> None:
        try:
            extra = getattr(record, "extra_fields", None) or {}
            log(record.name, record.levelname, record.getMessage(), **extra)
        except Exception:
            self.handleError(record)


def get_logger(name: str) -> logging.Logger:
    logger = logging.getLogger(f"saltos.{name}")
    if not any(isinstance(h, _JsonLinesHandler) for h in logger.handlers):
        logger.addHandler(_JsonLinesHandler())
        logger.setLevel(logging.DEBUG)
        logger.propagate = False
    return logger
