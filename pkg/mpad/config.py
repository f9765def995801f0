from __future__ import annotations

import os
from dataclasses import dataclass

from .errors import ConfigError


@dataclass(frozen=True)
class Settings:
    precision_bits: int
    search_budget: int
    workers: int
    log_level: str


def _env_int(name: str, default: int, *, minimum: int = 1) -> int:
    raw = os.environ.get(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw.strip(), 0)
    except ValueError as e:
        raise ConfigError(f"{name} must be an integer, got {raw!r}.") from e
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}.")
    return value


LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def get_settings() -> Settings:
    log_level = os.environ.get("MPAD_LOG_LEVEL", "WARNING").strip().upper()
    if log_level not in LOG_LEVELS:
        choices = ", ".join(LOG_LEVELS)
        raise ConfigError(f"MPAD_LOG_LEVEL must be one of {choices}, got {log_level!r}.")
    return Settings(
        precision_bits=_env_int("MPAD_PRECISION_BITS", 256, minimum=53),
        search_budget=_env_int("MPAD_SEARCH_BUDGET", 2**26),
        workers=_env_int("MPAD_WORKERS", 1),
        log_level=log_level,
    )
