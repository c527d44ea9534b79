#!/usr/bin/env python3
"""Orchestrator for saltos: loads .env and hands the arguments to scripts.cli."""
from __future__ import annotations

import sys
from pathlib import Path

from dotenv import load_dotenv

from scripts.cli import run
from scripts.settings import get_settings

ROOT = Path(__file__).resolve().parent


def main() -> None:
    load_dotenv(dotenv_path=ROOT / ".env")
    get_settings()
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
