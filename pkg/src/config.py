"""Configuration loading and validation."""

from __future__ import annotations

from dataclasses import dataclass
import os

from dotenv import load_dotenv


DEFAULT_LOG_MAX_BYTES = 5 * 1024 * 1024


@dataclass(frozen=True)
class Config:
    log_file: str
    log_level: str
    log_max_bytes: int
    results_dir: str


def _int_env(name: str, default: int) -> int:
    value = os.getenv(name)
    if value is None or not value.strip():
        return default
    try:
        return int(value)
    except ValueError:
        raise ValueError(f"Environment variable {name} must be an integer, got {value!r}") from None


def load_config() -> Config:
    load_dotenv()

    return Config(
        log_file=os.getenv("LOG_FILE", "logs/nbldpc.log"),
        log_level=os.getenv("LOG_LEVEL", "INFO").upper(),
        log_max_bytes=_int_env("LOG_MAX_BYTES", DEFAULT_LOG_MAX_BYTES),
        results_dir=os.getenv("RESULTS_DIR", "results"),
    )
