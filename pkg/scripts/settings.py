"""Runtime settings: scripts/config.json defaults, overridden by .env / environment."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Tuple

from dotenv import load_dotenv

ROOT = Path(__file__).resolve().parents[1]
CONFIG_PATH = ROOT / "scripts" / "config.json"
RULES_PATH = ROOT / "scripts" / "rules.json"
ENV_PATH = ROOT / ".env"


@dataclass(frozen=True)
class Settings:
    tolerance: float
    divergence_threshold: float
    max_terms: int
    scan_terms: int
    check_eps: Tuple[float, ...]
    default_depth: int
    census_workers: int
    api_host: str
    api_port: int
    log_file: str
    console_level: str


def load_config() -> Dict[str, Any]:
    return json.loads(CONFIG_PATH.read_text(encoding="utf-8"))


def load_rules() -> Dict[str, Any]:
    return json.loads(RULES_PATH.read_text(encoding="utf-8"))


def _env(name: str, default: Any, cast) -> Any:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return cast(raw)
    except ValueError:
        return default


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    load_dotenv(dotenv_path=ENV_PATH)
    cfg = load_config()
    numerics = cfg.get("numerics", {})
    logging_cfg = cfg.get("logging", {})
    api = cfg.get("api", {})

    log_file = _env("SALTOS_LOG_FILE", logging_cfg.get("file", "data/logs.txt"), str)
    console_level = _env("SALTOS_CONSOLE_LEVEL", logging_cfg.get("console_level", "OFF"), str)
    # the logger reads these lazily from the environment
    os.environ.setdefault("SALTOS_LOG_FILE", log_file)
    os.environ.setdefault("SALTOS_CONSOLE_LEVEL", console_level)

    return Settings(
        tolerance=_env("SALTOS_TOLERANCE", float(numerics.get("tolerance", 1e-12)), float),
        divergence_threshold=_env(
            "SALTOS_DIVERGENCE_THRESHOLD", float(numerics.get("divergence_threshold", 1e15)), float
        ),
        max_terms=_env("SALTOS_MAX_TERMS", int(numerics.get("max_terms", 2_000_000)), int),
        scan_terms=int(numerics.get("scan_terms", 256)),
        check_eps=tuple(float(e) for e in numerics.get("check_eps", [1.0, 0.1, 0.01])),
        default_depth=_env("SALTOS_DEFAULT_DEPTH", int(cfg.get("partition", {}).get("default_depth", 64)), int),
        census_workers=_env("SALTOS_CENSUS_WORKERS", int(cfg.get("census", {}).get("workers", 1)), int),
        api_host=str(api.get("host", "127.0.0.1")),
        api_port=_env("SALTOS_API_PORT", int(api.get("port", 8088)), int),
        log_file=log_file,
        console_level=console_level,
    )


def reset_settings() -> None:
    get_settings.cache_clear()
