"""Fixtures compartilhadas: raiz no sys.path, log isolado e funções de exemplo."""
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
SAMPLES = Path(__file__).resolve().parent / "samples"
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from scripts import codec  # noqa: E402
from scripts.settings import reset_settings  # noqa: E402


@pytest.fixture(autouse=True, scope="session")
def _log_sink(tmp_path_factory):
    """Logs vão para um arquivo temporário, nunca para data/logs.txt."""
    patch = pytest.MonkeyPatch()
    patch.setenv("SALTOS_LOG_FILE", str(tmp_path_factory.mktemp("logs") / "logs.txt"))
    patch.setenv("SALTOS_CONSOLE_LEVEL", "OFF")
    reset_settings()
    yield
    patch.undo()
    reset_settings()


@pytest.fixture(scope="session")
def samples() -> Path:
    return SAMPLES


@pytest.fixture(scope="session")
def step_fn():
    """H = 1 on [1, 2], 0 on [0, 1)."""
    return codec.function_from_dict(codec.load_json(SAMPLES / "step.json"))


@pytest.fixture(scope="session")
def geo_fn():
    """Jumps 2**-k at 1 - 2**-k on [0, inf), left-continuous."""
    return codec.function_from_dict(codec.load_json(SAMPLES / "geo.json"))


@pytest.fixture(scope="session")
def hand_path():
    """Jumps +1.2 at 0.3, -0.4 at 0.7 and +0.05 at 1.4 on [0, 2]."""
    return codec.function_from_dict(codec.load_json(SAMPLES / "path.json"))
