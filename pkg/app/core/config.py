from __future__ import annotations

import os
from dataclasses import dataclass

from app.core.errors import ConfigError

# Allow optional loading of a .env file if python-dotenv is installed
try:
    from dotenv import load_dotenv

    load_dotenv()
except Exception:
    pass


DEFAULT_EXACT_CAP = 24
DEFAULT_MAX_RETRIES = 100
DEFAULT_WORKERS = 1
DEFAULT_LOG_LEVEL = "WARNING"


def _env_int(name: str, default: int, minimum: int = 1) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw.strip())
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}", variable=name)
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}", variable=name)
    return value


@dataclass
class StrongIdConfig:
    exact_cap: int = DEFAULT_EXACT_CAP
    max_retries: int = DEFAULT_MAX_RETRIES
    workers: int = DEFAULT_WORKERS
    log_level: str = DEFAULT_LOG_LEVEL

    @classmethod
    def from_env(cls) -> "StrongIdConfig":
        # Read on every call so a changed environment is always honoured.
        return cls(
            exact_cap=_env_int("STRONGID_EXACT_CAP", DEFAULT_EXACT_CAP),
            max_retries=_env_int("STRONGID_MAX_RETRIES", DEFAULT_MAX_RETRIES),
            workers=_env_int("STRONGID_WORKERS", DEFAULT_WORKERS),
            log_level=os.getenv("STRONGID_LOG_LEVEL", DEFAULT_LOG_LEVEL).upper(),
        )
