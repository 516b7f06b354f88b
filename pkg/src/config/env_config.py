"""Environment defaults (``.env`` files are honoured)."""

import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

load_dotenv()

REPO_ROOT = Path(__file__).resolve().parents[2]


class EnvConfig:
    """Settings read from the environment.

    Read on every access so tests can patch ``os.environ``.
    """

    @staticmethod
    def no_color() -> bool:
        return bool(os.getenv("TM_NO_COLOR"))

    @staticmethod
    def corpus_dir() -> Path:
        override = os.getenv("TM_CORPUS_DIR")
        return Path(override) if override else REPO_ROOT / "corpus"

    @staticmethod
    def log_level() -> str:
        return (os.getenv("TM_LOG_LEVEL") or "WARNING").upper()

    @staticmethod
    def config_path() -> Optional[Path]:
        value = os.getenv("TM_CONFIG")
        return Path(value) if value else None

    @staticmethod
    def fuzz_examples(default: int = 2000) -> int:
        return _int_env("TM_FUZZ_EXAMPLES", default)

    @staticmethod
    def property_examples(default: int = 100) -> int:
        return _int_env("TM_PROPERTY_EXAMPLES", default)


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}")
