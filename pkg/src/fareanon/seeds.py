"""Keyed PRF and sub-seed derivation.

One run seed reproduces every stochastic step of a release. Each step gets
its own domain-separation label so the derived streams are independent, and
the derivation uses the same MAC construction as pseudonym generation.
"""

from __future__ import annotations

import hashlib
import hmac

# Domain-separation labels for the stochastic steps.
LABEL_PSEUDONYM = "pseudonym"
LABEL_WEEKDAY_SAMPLE = "weekday-sample"
LABEL_CARD_SAMPLE = "card-sample"
LABEL_DATE_ID = "date-id"
LABEL_MONTE_CARLO = "monte-carlo"

_SEED_BYTES = 8
MAX_RUN_SEED = 2**64 - 1


def prf_bytes(key: bytes, *parts: bytes | str) -> bytes:
    """HMAC-SHA256 over length-prefixed parts.

    Length prefixes make the encoding injective: no choice of parts can
    collide with a different split of the same concatenation.
    """
    if not key:
        raise ValueError("PRF key must be non-empty")
    mac = hmac.new(key, digestmod=hashlib.sha256)
    for part in parts:
        data = part.encode("utf-8") if isinstance(part, str) else part
        mac.update(len(data).to_bytes(4, "big"))
        mac.update(data)
    return mac.digest()


def derive_seed(run_seed: int, label: str, token: str = "") -> int:
    """Derive the sub-seed for one stochastic step of a run.

    `label` names the step (see the LABEL_* constants); `token` scopes it
    (a month "YYYY-MM", a date ISO string, ...). Identical inputs always
    give the identical 64-bit seed.
    """
    if not 0 <= run_seed <= MAX_RUN_SEED:
        raise ValueError(f"run_seed must be a 64-bit unsigned integer, got {run_seed}")
    digest = prf_bytes(run_seed.to_bytes(_SEED_BYTES, "big"), label, token)
    return int.from_bytes(digest[:_SEED_BYTES], "big")
