"""Date obfuscation: calendar dates become unique random integers."""

from __future__ import annotations

import random
from datetime import date
from typing import Iterable


def build_date_id_map(retained_dates: Iterable[date], seed: int) -> dict[date, int]:
    """Assign each retained date a distinct ID from 1..N, uniformly at random.

    The assignment is a seeded uniform permutation, so the IDs carry no
    information about chronological order beyond what year, month, and
    weekday already reveal. Dense IDs avoid accidentally encoding the date
    itself (day-of-month as ID would be a direct leak).
    """
    dates = sorted(set(retained_dates))
    if not dates:
        raise ValueError("retained_dates must be non-empty")
    ids = list(range(1, len(dates) + 1))
    random.Random(seed).shuffle(ids)
    return dict(zip(dates, ids))
