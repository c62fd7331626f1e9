"""Circadian-day assignment, time truncation, and trip sequencing.

A circadian day runs from 03:00 to 03:00 local wall-clock time: late-night
trips belong to the service day they logically extend. All functions here
are pure; grouping records into card-days is the caller's job.
"""

from __future__ import annotations

from datetime import date, datetime, time, timedelta
from typing import Sequence

from .records import RawTransaction

DEFAULT_BOUNDARY = time(3, 0)

_ONE_DAY = timedelta(days=1)


def circadian_date(ts: datetime, boundary: time = DEFAULT_BOUNDARY) -> date:
    """Service date of a civil timestamp.

    Times at or after the boundary belong to their own calendar date;
    earlier times belong to the previous one. Wall-clock only: DST
    transitions need no special handling.
    """
    d = ts.date()
    return d if ts.time() >= boundary else d - _ONE_DAY


def truncate_time(t: time, granularity_minutes: int) -> time:
    """Floor a time of day to the granularity grid, zeroing seconds.

    Floor (not nearest) so a truncated value never crosses into a later
    interval than the true time.
    """
    if granularity_minutes <= 0 or 60 % granularity_minutes != 0:
        raise ValueError(f"granularity must divide 60, got {granularity_minutes}")
    return time(t.hour, t.minute - t.minute % granularity_minutes)


def truncate_hms(hms: str, granularity_minutes: int) -> str:
    """truncate_time on an 'HH:MM:SS' string (streaming fast path)."""
    minute = int(hms[3:5])
    return f"{hms[:3]}{minute - minute % granularity_minutes:02d}:00"


def sequence_ranks(keys: Sequence) -> list[int]:
    """Stable 1-based ranks of `keys` in ascending order.

    Ties keep input order, so identical sort keys never reorder records.
    result[i] is the rank of keys[i].
    """
    order = sorted(range(len(keys)), key=keys.__getitem__)
    ranks = [0] * len(keys)
    for rank, idx in enumerate(order, start=1):
        ranks[idx] = rank
    return ranks


def assign_trip_sequence(records: Sequence[RawTransaction]) -> list[int]:
    """Trip sequence IDs for one card's transactions in one circadian day.

    IDs are 1..n by ascending true (pre-truncation) tag-on time, with ties
    broken by input order; the numbering preserves true order even when
    truncated times collide. result[i] belongs to records[i].
    """
    return sequence_ranks([r.tag_on_at for r in records])
