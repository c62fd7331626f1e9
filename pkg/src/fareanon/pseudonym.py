"""Card pseudonyms that persist for exactly one circadian day."""

from __future__ import annotations

from datetime import date

from .errors import KeyMaterialError
from .seeds import LABEL_PSEUDONYM, prf_bytes

PSEUDONYM_BYTES = 16
PSEUDONYM_HEX_CHARS = PSEUDONYM_BYTES * 2


def pseudonymize(card_serial: bytes | str, service_date: date, key: bytes) -> str:
    """Keyed pseudonym for one (card, circadian day) pair.

    A MAC over the (serial, date) tuple, truncated to 16 bytes and rendered
    as 32 uppercase hex chars. Equal inputs always collide; distinct inputs
    collide with probability ~2**-128. The serial is unrecoverable without
    the key, which is why an empty key is a hard configuration error: an
    unkeyed hash could be reversed by enumerating the serial space.
    """
    if not key:
        raise KeyMaterialError("pseudonymization requires a non-empty secret key")
    serial = card_serial.encode("utf-8") if isinstance(card_serial, str) else card_serial
    digest = prf_bytes(key, LABEL_PSEUDONYM, serial, service_date.isoformat())
    return digest[:PSEUDONYM_BYTES].hex().upper()
