"""The two stochastic suppression steps and the inclusion-probability math.

Per-month weekday sampling keeps a fixed number of each weekday's dates;
per-day card sampling keeps an exact fraction of the cards active that day.
Both are deterministic functions of their seed, and card samples on
different dates use independently derived seeds.
"""

from __future__ import annotations

import calendar
import math
import random
from dataclasses import dataclass
from datetime import date
from typing import Iterable, Mapping, Sequence

from .config import AnonymizationConfig
from .dateobfs import build_date_id_map
from .errors import ConfigError
from .records import day_of_week_id
from .seeds import LABEL_CARD_SAMPLE, LABEL_DATE_ID, LABEL_WEEKDAY_SAMPLE, derive_seed


def round_half_up(x: float) -> int:
    """Round to nearest integer, halves up (documented sampling rounding)."""
    return math.floor(x + 0.5)


def month_weekday_dates(year: int, month: int) -> dict[int, list[date]]:
    """Dates of one calendar month grouped by DayOfWeekID (1=Sunday..7=Saturday)."""
    _, days = calendar.monthrange(year, month)
    groups: dict[int, list[date]] = {dow: [] for dow in range(1, 8)}
    for day in range(1, days + 1):
        d = date(year, month, day)
        groups[day_of_week_id(d)].append(d)
    return groups


def _choose_dates(dates: Sequence[date], keep_count: int, rng: random.Random) -> list[date]:
    """Uniform keep_count-subset of one weekday's dates (selection core)."""
    return rng.sample(list(dates), keep_count)


def _shuffle_take(ordered: list, count: int, rng: random.Random) -> list:
    """Seeded-shuffle exact-count selection core: shuffle, take the first count."""
    shuffled = list(ordered)
    rng.shuffle(shuffled)
    return shuffled[:count]


def sample_weekdays(year: int, month: int, keep_count: int, seed: int) -> set[date]:
    """Retained dates of one month: keep_count of each weekday, chosen uniformly.

    Every Gregorian month has 4 or 5 of each weekday, so keep_count=3 always
    fits. Deterministic given the seed.
    """
    groups = month_weekday_dates(year, month)
    short = {dow: len(ds) for dow, ds in groups.items() if len(ds) < keep_count}
    if short:
        raise ConfigError(
            f"keep_count {keep_count} exceeds weekday occurrences in {year}-{month:02d}: {short}"
        )
    rng = random.Random(seed)
    retained: set[date] = set()
    for dow in range(1, 8):
        retained.update(_choose_dates(groups[dow], keep_count, rng))
    return retained


def sample_cards(cards: Iterable[str], rate: float, seed: int, day: date) -> set[str]:
    """Exact-count uniform sample of the cards active on one circadian day.

    Retains round_half_up(rate * n) cards via a seeded shuffle keyed on
    (seed, day), so decisions on different days are independent and any one
    day's decision is reproducible in isolation.
    """
    if not 0 < rate <= 1:
        raise ConfigError(f"rate must be in (0, 1], got {rate}")
    ordered = sorted(cards)
    if not ordered:
        return set()
    rng = random.Random(derive_seed(seed, LABEL_CARD_SAMPLE, day.isoformat()))
    return set(_shuffle_take(ordered, round_half_up(rate * len(ordered)), rng))


def inclusion_probability(weekday_occurrences: int, keep_count: int, card_rate: float) -> float:
    """Chance that one card's transactions appear in a given day's release."""
    if keep_count > weekday_occurrences:
        raise ValueError(
            f"keep_count {keep_count} exceeds weekday_occurrences {weekday_occurrences}"
        )
    if weekday_occurrences < 1 or keep_count < 1:
        raise ValueError("weekday_occurrences and keep_count must be >= 1")
    if not 0 < card_rate <= 1:
        raise ValueError(f"card_rate must be in (0, 1], got {card_rate}")
    return card_rate * keep_count / weekday_occurrences


def streak_inclusion_probability(per_day_probs: Iterable[float]) -> float:
    """Chance of appearing on every day of a run of days (independent samples)."""
    product = 1.0
    for p in per_day_probs:
        if not 0 <= p <= 1:
            raise ValueError(f"probability out of range: {p}")
        product *= p
    return product


@dataclass(frozen=True)
class MonthPlan:
    """Per-month derived sampling artifact (private; never published).

    Carries the retained dates, the date->RandomWeekID bijection, and the
    sub-seeds the decisions were made with.
    """

    year: int
    month: int
    retained_dates: frozenset[date]
    date_id_map: Mapping[date, int]
    seeds: Mapping[str, int]

    def random_week_id(self, service_date: date) -> int:
        return self.date_id_map[service_date]


def build_month_plan(year: int, month: int, config: AnonymizationConfig) -> MonthPlan:
    """Retained-date selection and date obfuscation for one month.

    weekday_keep_count=None retains every date of the month (sampling
    disabled); the date->ID permutation is still applied.
    """
    token = f"{year:04d}-{month:02d}"
    weekday_seed = derive_seed(config.run_seed, LABEL_WEEKDAY_SAMPLE, token)
    date_id_seed = derive_seed(config.run_seed, LABEL_DATE_ID, token)
    if config.weekday_keep_count is None:
        groups = month_weekday_dates(year, month)
        retained = {d for ds in groups.values() for d in ds}
    else:
        retained = sample_weekdays(year, month, config.weekday_keep_count, weekday_seed)
    return MonthPlan(
        year=year,
        month=month,
        retained_dates=frozenset(retained),
        date_id_map=build_date_id_map(retained, date_id_seed),
        seeds={
            LABEL_WEEKDAY_SAMPLE: weekday_seed,
            LABEL_DATE_ID: date_id_seed,
        },
    )
