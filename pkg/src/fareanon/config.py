"""Scheme parameters, key-file handling, and config digests."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field, replace
from datetime import time
from pathlib import Path

from .errors import ConfigError, KeyMaterialError
from .seeds import MAX_RUN_SEED

KEY_FILE_BYTES = 32

DEFAULT_CARD_SAMPLE_RATE = 0.5
DEFAULT_WEEKDAY_KEEP_COUNT = 3
DEFAULT_TIME_GRANULARITY_MINUTES = 10
DEFAULT_CIRCADIAN_BOUNDARY = time(3, 0)


@dataclass(frozen=True)
class AnonymizationConfig:
    """Every scheme parameter plus the run's secret key and seed.

    weekday_keep_count=None disables day-of-week sampling entirely (every
    date retained); the privacy audit uses that for its no-sampling
    counterfactual. The integer form must be >= 1.
    """

    secret_key: bytes = field(repr=False)
    run_seed: int = 0
    card_sample_rate: float = DEFAULT_CARD_SAMPLE_RATE
    weekday_keep_count: int | None = DEFAULT_WEEKDAY_KEEP_COUNT
    time_granularity_minutes: int = DEFAULT_TIME_GRANULARITY_MINUTES
    circadian_boundary: time = DEFAULT_CIRCADIAN_BOUNDARY

    def __post_init__(self):
        if not self.secret_key:
            raise KeyMaterialError("secret_key must be non-empty")
        if not 0 < self.card_sample_rate <= 1:
            raise ConfigError(f"card_sample_rate must be in (0, 1], got {self.card_sample_rate}")
        if self.weekday_keep_count is not None and self.weekday_keep_count < 1:
            raise ConfigError(f"weekday_keep_count must be >= 1, got {self.weekday_keep_count}")
        if self.time_granularity_minutes <= 0 or 60 % self.time_granularity_minutes != 0:
            raise ConfigError(
                f"time_granularity_minutes must divide 60, got {self.time_granularity_minutes}"
            )
        if not 0 <= self.run_seed <= MAX_RUN_SEED:
            raise ConfigError(f"run_seed must be a 64-bit unsigned integer, got {self.run_seed}")

    def without_sampling(self) -> "AnonymizationConfig":
        """Counterfactual config: every card, every date retained."""
        return replace(self, card_sample_rate=1.0, weekday_keep_count=None)


def parse_boundary(text: str) -> time:
    """Parse 'HH:MM' or 'HH:MM:SS' into a time of day."""
    try:
        return time.fromisoformat(text)
    except ValueError as exc:
        raise ConfigError(f"bad circadian_boundary {text!r}: {exc}") from None


def key_fingerprint(key: bytes) -> str:
    """Short non-reversible identifier for a key; safe to log and store."""
    return hashlib.sha256(key).hexdigest()[:16]


def read_key_file(path: str | Path) -> bytes:
    p = Path(path)
    if not p.exists():
        raise KeyMaterialError(f"key file not found: {p}")
    data = p.read_bytes()
    if len(data) != KEY_FILE_BYTES:
        raise KeyMaterialError(
            f"key file {p} must be exactly {KEY_FILE_BYTES} raw bytes, got {len(data)}"
        )
    return data


def write_key_file(path: str | Path) -> bytes:
    """Generate a fresh key file (refuses to overwrite an existing one)."""
    p = Path(path)
    if p.exists():
        raise KeyMaterialError(f"refusing to overwrite existing key file: {p}")
    key = os.urandom(KEY_FILE_BYTES)
    fd = os.open(p, os.O_WRONLY | os.O_CREAT | os.O_EXCL, 0o600)
    try:
        os.write(fd, key)
    finally:
        os.close(fd)
    return key


def load_config_file(path: str | Path) -> dict:
    """Load the flat JSON config file; values are overridable by CLI flags."""
    p = Path(path)
    try:
        raw = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {p}: {exc}") from None
    try:
        values = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {p} is not valid JSON: {exc}") from None
    if not isinstance(values, dict):
        raise ConfigError(f"config file {p} must contain a JSON object")
    return values


def public_config_dict(config: AnonymizationConfig) -> dict:
    """Config snapshot safe to persist: key bytes replaced by fingerprint."""
    return {
        "card_sample_rate": config.card_sample_rate,
        "weekday_keep_count": config.weekday_keep_count,
        "time_granularity_minutes": config.time_granularity_minutes,
        "circadian_boundary": config.circadian_boundary.strftime("%H:%M:%S"),
        "run_seed": config.run_seed,
        "key_fingerprint": key_fingerprint(config.secret_key),
    }


def config_digest(config: AnonymizationConfig) -> str:
    """Digest of the executed configuration, for run logs and the manifest."""
    canonical = json.dumps(public_config_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
