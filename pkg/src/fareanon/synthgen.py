"""Synthetic smart-card transaction generator.

Produces raw feeds with the structure the anonymizer cares about: habitual
commuters (stable home trip, morning out and evening back on workdays),
casual riders (Poisson trip counts, broad departure times), a small
after-midnight share so the early-hours day assignment has something to do,
and a reserved block of origin/destination pairs that only one card each
ever rides, so uniqueness-driven audits have known positives.

Everything is a pure function of (population spec, year, month, seed): each
card-day draws from its own seeded generator, so any month can be
regenerated identically, in any order, without storing the data.
"""

from __future__ import annotations

import csv
import json
import math
import random
from dataclasses import dataclass, replace
from datetime import date, timedelta
from pathlib import Path
from typing import Iterator, Sequence

from .errors import ConfigError
from .rawio import atomic_write
from .records import RAW_COLUMNS, RawTransaction, format_money, raw_from_fields

# Stream slot for the per-card profile generator. Day slots occupy
# month*31+day-1 (31..402), so 511 never collides with a day.
_PROFILE_SLOT = 511


def _compose_seed(seed: int, card_idx: int, slot: int) -> int:
    return (seed << 48) | (card_idx << 9) | slot


def _day_slot(month: int, day: int) -> int:
    return month * 31 + day - 1


@dataclass(frozen=True)
class AgencySpec:
    """One operator in the synthetic network.

    `tags_off` controls whether trips carry exit taps; `routes` may be empty
    for systems that do not report a line. Distance fares add
    `per_hop_cents` per station of separation.
    """

    agency_id: int
    name: str
    locations: tuple[tuple[int, str], ...]
    routes: tuple[tuple[int, str], ...] = ()
    tags_off: bool = False
    base_fare_cents: int = 225
    per_hop_cents: int = 0
    min_ride_minutes: int = 8
    per_hop_minutes: int = 3


def _stations(base: int, names: Sequence[str]) -> tuple[tuple[int, str], ...]:
    return tuple((base + i, name) for i, name in enumerate(names))


_HARBORLINE_STATIONS = (
    "Castlewood",
    "Fernhill",
    "Granite Park",
    "Harbor Point",
    "Ironbridge",
    "Juniper Street",
    "Kingsmill",
    "Larkspur Road",
    "Mariners Quay",
    "Northgate",
    "Oakhollow",
    "Pembroke",
    "Quarry Lane",
    "Riverbend",
    "Silverwood",
    "Thornbury",
    "Union Landing",
    "Vale Crossing",
    "Westbrook",
    "Yarrow Hill",
    "Ashgrove",
    "Brookfield",
    "Coppermine",
    "Dunmore",
)

_CROSSTOWN_STOPS = tuple(
    f"{street} & {cross}"
    for street in ("Alder", "Birch", "Cedar", "Dogwood", "Elm", "Fir")
    for cross in ("1st", "4th", "7th", "10th", "13th")
)

_BAYSIDE_PIERS = (
    "Pier One",
    "Sandpiper Cove",
    "Gullwing Terminal",
    "Anchor Basin",
    "Driftwood Landing",
    "Heron Dock",
)

_VALLEY_STOPS = tuple(f"Valley Stop {i}" for i in range(1, 19))

DEFAULT_AGENCIES = (
    AgencySpec(
        agency_id=11,
        name="Harborline Rail",
        locations=_stations(1100, _HARBORLINE_STATIONS),
        tags_off=True,
        base_fare_cents=200,
        per_hop_cents=35,
        min_ride_minutes=9,
        per_hop_minutes=3,
    ),
    AgencySpec(
        agency_id=23,
        name="Crosstown Bus",
        locations=_stations(2300, _CROSSTOWN_STOPS),
        routes=tuple((2350 + i, f"Line {c}") for i, c in enumerate("ABCDEFGHJKLM")),
        base_fare_cents=225,
    ),
    AgencySpec(
        agency_id=31,
        name="Bayside Ferry",
        locations=_stations(3100, _BAYSIDE_PIERS),
        routes=((3150, "North Run"), (3151, "South Run")),
        tags_off=True,
        base_fare_cents=450,
        per_hop_cents=75,
        min_ride_minutes=18,
        per_hop_minutes=9,
    ),
    AgencySpec(
        agency_id=42,
        name="Valley Express",
        locations=_stations(4200, _VALLEY_STOPS),
        base_fare_cents=175,
    ),
)

DEFAULT_PRODUCTS = (
    (10, "Adult Cash Value"),
    (20, "Adult Monthly Pass"),
    (30, "Youth Cash Value"),
)


@dataclass(frozen=True)
class PopulationSpec:
    """Tunable rider population. Defaults land near half a million rows a
    month at ten thousand cards; `scaled` multiplies the card count."""

    cards: int = 10_000
    commuter_fraction: float = 0.55
    unique_commuters: int = 40
    weekday_trip_mean: float = 2.2
    casual_trip_mean: float = 1.5
    weekend_multiplier: float = 0.55
    commute_probability: float = 0.92
    serial_base: int = 9_100_000_000_000_000
    agencies: tuple[AgencySpec, ...] = DEFAULT_AGENCIES
    agency_weights: tuple[float, ...] = (0.45, 0.35, 0.05, 0.15)
    products: tuple[tuple[int, str], ...] = DEFAULT_PRODUCTS

    def __post_init__(self) -> None:
        if self.cards < 1:
            raise ConfigError("cards must be positive")
        for name in ("commuter_fraction", "weekend_multiplier", "commute_probability"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {value}")
        if self.unique_commuters < 0:
            raise ConfigError("unique_commuters must be >= 0")
        if self.weekday_trip_mean < 2 * self.commute_probability:
            raise ConfigError(
                "weekday_trip_mean below the expected commute legs; "
                "lower commute_probability or raise the mean"
            )
        if self.casual_trip_mean < 0:
            raise ConfigError("casual_trip_mean must be >= 0")
        if not self.agencies:
            raise ConfigError("at least one agency required")
        if len(self.agency_weights) != len(self.agencies):
            raise ConfigError("agency_weights must match agencies")
        if any(w < 0 for w in self.agency_weights) or sum(self.agency_weights) <= 0:
            raise ConfigError("agency_weights must be non-negative and sum > 0")
        if not self.agencies[0].tags_off or len(self.agencies[0].locations) < 2:
            raise ConfigError("first agency anchors unique commuters; needs tag-off and >=2 stops")

    def scaled(self, factor: float) -> "PopulationSpec":
        if factor <= 0:
            raise ConfigError(f"scale must be positive, got {factor}")
        return replace(self, cards=max(1, round(self.cards * factor)))


def default_population() -> PopulationSpec:
    return PopulationSpec()


@dataclass(frozen=True)
class CardProfile:
    serial: str
    kind: str  # "unique_commuter" | "commuter" | "casual"
    agency_index: int | None
    origin: int | None  # index into the agency's locations
    dest: int | None
    route_index: int | None
    anchor_am: int
    anchor_pm: int
    jitter: float
    product: tuple[int, str]


def _ordered_pairs(count: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(count) for j in range(count) if i != j]


def _anchor_pools(spec: PopulationSpec) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """Split the first agency's ordered station pairs into (reserved, open).

    A reserved pair and its reverse both leave the open pool: the rider who
    owns the pair is the only card that ever travels between those two
    stations, in either direction. The cap keeps at least one open pair so
    other riders still have somewhere to go.
    """
    pairs = _ordered_pairs(len(spec.agencies[0].locations))
    commuters = round(spec.cards * spec.commuter_fraction)
    reserved_n = min(spec.unique_commuters, (len(pairs) - 2) // 2, commuters)
    reserved = pairs[:reserved_n]
    blocked = set(reserved) | {(d, o) for o, d in reserved}
    return reserved, [p for p in pairs if p not in blocked]


def _poisson(rng: random.Random, mean: float) -> int:
    # Knuth's product method; means here stay small so this is cheap.
    if mean <= 0:
        return 0
    limit = math.exp(-mean)
    count = 0
    product = rng.random()
    while product > limit:
        count += 1
        product *= rng.random()
    return count


def build_profiles(spec: PopulationSpec, seed: int) -> list[CardProfile]:
    """Deterministic per-card habits.

    Card order is fixed: the reserved unique commuters first, then regular
    commuters, then casual riders. Each unique commuter owns one of the
    first agency's station pairs that no other card ever rides, in either
    direction.
    """
    reserved, open_anchor = _anchor_pools(spec)
    reserved_n = len(reserved)
    commuters = round(spec.cards * spec.commuter_fraction)
    open_pairs: dict[int, list[tuple[int, int]]] = {
        index: _ordered_pairs(len(agency.locations)) for index, agency in enumerate(spec.agencies)
    }
    open_pairs[0] = open_anchor

    agency_indices = range(len(spec.agencies))
    profiles: list[CardProfile] = []
    for idx in range(spec.cards):
        rng = random.Random(_compose_seed(seed, idx, _PROFILE_SLOT))
        serial = str(spec.serial_base + idx)
        product = spec.products[rng.randrange(len(spec.products))]
        anchor_am = 180 + rng.randrange(195)  # depart 06:00-09:14
        anchor_pm = 840 + rng.randrange(150)  # return 17:00-19:29
        jitter = 4.0 + rng.random() * 14.0
        if idx < reserved_n:
            origin, dest = reserved[idx]
            profiles.append(
                CardProfile(serial, "unique_commuter", 0, origin, dest, None,
                            anchor_am, anchor_pm, jitter, product)
            )
        elif idx < commuters:
            agency_index = rng.choices(agency_indices, weights=spec.agency_weights)[0]
            origin, dest = open_pairs[agency_index][
                rng.randrange(len(open_pairs[agency_index]))
            ]
            routes = spec.agencies[agency_index].routes
            route_index = rng.randrange(len(routes)) if routes else None
            profiles.append(
                CardProfile(serial, "commuter", agency_index, origin, dest, route_index,
                            anchor_am, anchor_pm, jitter, product)
            )
        else:
            profiles.append(
                CardProfile(serial, "casual", None, None, None, None,
                            anchor_am, anchor_pm, jitter, product)
            )
    return profiles


def _emit_trip(
    rows: list,
    serial: str,
    agency: AgencySpec,
    origin: int,
    dest: int,
    route: tuple[int, str] | None,
    product: tuple[int, str],
    day_iso: str,
    next_iso: str,
    offset_minutes: int,
    rng: random.Random,
) -> None:
    """Append one raw CSV row. `offset_minutes` counts from 03:00 of the
    service day, so 1260+ lands after midnight on the next civil date."""
    total = 180 + offset_minutes
    if total < 1440:
        on_day = day_iso
        minutes = total
    else:
        on_day = next_iso
        minutes = total - 1440
    second = rng.randrange(60)
    tag_on = f"{on_day} {minutes // 60:02d}:{minutes % 60:02d}:{second:02d}"

    on_id, on_name = agency.locations[origin]
    if agency.tags_off:
        hops = abs(origin - dest)
        ride = agency.min_ride_minutes + agency.per_hop_minutes * hops + rng.randrange(4)
        off_total = total + ride
        if off_total < 1440:
            off_day = day_iso
            off_minutes = off_total
        else:
            off_day = next_iso
            off_minutes = off_total - 1440
        tag_off = f"{off_day} {off_minutes // 60:02d}:{off_minutes % 60:02d}:{rng.randrange(60):02d}"
        off_id, off_name = agency.locations[dest]
        off_id_s = str(off_id)
        fare = agency.base_fare_cents + agency.per_hop_cents * hops
    else:
        tag_off = ""
        off_id_s = ""
        off_name = ""
        fare = agency.base_fare_cents

    rows.append(
        (
            tag_on,
            serial,
            [
                serial,
                tag_on,
                tag_off,
                str(agency.agency_id),
                agency.name,
                str(route[0]) if route else "",
                route[1] if route else "",
                str(on_id),
                on_name,
                off_id_s,
                off_name,
                format_money(fare),
                str(product[0]),
                product[1],
            ],
        )
    )


def _casual_offset(rng: random.Random) -> int:
    roll = rng.random()
    if roll < 0.03:
        return 1260 + int(rng.random() * 180)  # after midnight, before 03:00
    return 150 + int(rng.random() * 1050)  # 05:30 through 22:59


def _clamp_offset(value: float) -> int:
    return min(1439, max(0, int(value)))


def generate_month_fields(
    spec: PopulationSpec, year: int, month: int, seed: int
) -> Iterator[list[str]]:
    """Yield one month of raw CSV rows, ordered by (tag_on_at, card_serial).

    The month covers service days, 03:00 on the 1st through 02:59 after the
    last day, so every row anonymizes into this calendar month.
    """
    profiles = build_profiles(spec, seed)
    open_od: dict[int, list[tuple[int, int]]] = {}
    for index, agency in enumerate(spec.agencies):
        open_od[index] = _ordered_pairs(len(agency.locations))
    open_od[0] = _anchor_pools(spec)[1]

    extra_mean = spec.weekday_trip_mean - 2 * spec.commute_probability
    weekend_mean = spec.casual_trip_mean * spec.weekend_multiplier
    agency_indices = range(len(spec.agencies))

    day = date(year, month, 1)
    while day.month == month:
        day_iso = day.isoformat()
        next_iso = (day + timedelta(days=1)).isoformat()
        slot = _day_slot(month, day.day)
        workday = day.isoweekday() <= 5
        rows: list = []

        for card_idx, profile in enumerate(profiles):
            rng = random.Random(_compose_seed(seed, card_idx, slot))
            if profile.kind == "casual":
                mean = spec.casual_trip_mean if workday else weekend_mean
                for _ in range(_poisson(rng, mean)):
                    agency_index = rng.choices(agency_indices, weights=spec.agency_weights)[0]
                    agency = spec.agencies[agency_index]
                    pairs = open_od[agency_index]
                    origin, dest = pairs[rng.randrange(len(pairs))]
                    routes = agency.routes
                    route = routes[rng.randrange(len(routes))] if routes else None
                    _emit_trip(rows, profile.serial, agency, origin, dest, route,
                               profile.product, day_iso, next_iso, _casual_offset(rng), rng)
                continue

            agency = spec.agencies[profile.agency_index]
            route = (
                agency.routes[profile.route_index] if profile.route_index is not None else None
            )
            if workday:
                if rng.random() < spec.commute_probability:
                    out_at = _clamp_offset(rng.gauss(profile.anchor_am, profile.jitter))
                    back_at = _clamp_offset(rng.gauss(profile.anchor_pm, profile.jitter))
                    _emit_trip(rows, profile.serial, agency, profile.origin, profile.dest,
                               route, profile.product, day_iso, next_iso, out_at, rng)
                    _emit_trip(rows, profile.serial, agency, profile.dest, profile.origin,
                               route, profile.product, day_iso, next_iso, back_at, rng)
                extra = _poisson(rng, extra_mean)
            else:
                extra = _poisson(rng, weekend_mean)
            for _ in range(extra):
                pairs = open_od[profile.agency_index]
                origin, dest = pairs[rng.randrange(len(pairs))]
                _emit_trip(rows, profile.serial, agency, origin, dest, route,
                           profile.product, day_iso, next_iso, _casual_offset(rng), rng)

        rows.sort(key=lambda item: (item[0], item[1]))
        for _, _, fields in rows:
            yield fields
        day += timedelta(days=1)


def generate_month(
    spec: PopulationSpec, year: int, month: int, seed: int
) -> Iterator[RawTransaction]:
    """Record-level view of generate_month_fields."""
    for fields in generate_month_fields(spec, year, month, seed):
        yield raw_from_fields(fields)


def ground_truth(spec: PopulationSpec, year: int, month: int, seed: int) -> dict:
    """Who rode what: the map a privacy audit checks itself against."""
    cards: dict[str, dict] = {}
    for profile in build_profiles(spec, seed):
        if profile.kind == "casual":
            cards[profile.serial] = {"kind": "casual"}
            continue
        agency = spec.agencies[profile.agency_index]
        entry = {
            "kind": profile.kind,
            "agency_id": agency.agency_id,
            "origin": agency.locations[profile.origin][0],
            "dest": agency.locations[profile.dest][0],
        }
        if profile.route_index is not None:
            entry["route_id"] = agency.routes[profile.route_index][0]
        cards[profile.serial] = entry
    return {
        "format_version": 1,
        "seed": seed,
        "year": year,
        "month": month,
        "population": {
            "cards": spec.cards,
            "commuters": round(spec.cards * spec.commuter_fraction),
            "unique_commuters": len(_anchor_pools(spec)[0]),
            "serial_base": spec.serial_base,
        },
        "agencies": [
            {
                "agency_id": agency.agency_id,
                "name": agency.name,
                "tags_off": agency.tags_off,
                "locations": len(agency.locations),
                "routes": len(agency.routes),
            }
            for agency in spec.agencies
        ],
        "cards": cards,
    }


def generate_files(
    spec: PopulationSpec,
    year: int,
    month: int,
    seed: int,
    out_dir: str | Path,
) -> tuple[Path, Path, int]:
    """Write synthetic_<year>_<month>.csv plus its ground-truth JSON.

    Returns (csv_path, truth_path, data_row_count).
    """
    out = Path(out_dir)
    csv_path = out / f"synthetic_{year:04d}_{month:02d}.csv"
    truth_path = out / f"synthetic_{year:04d}_{month:02d}_truth.json"
    count = 0
    with atomic_write(csv_path) as handle:
        writer = csv.writer(handle)
        writer.writerow(RAW_COLUMNS)
        for fields in generate_month_fields(spec, year, month, seed):
            writer.writerow(fields)
            count += 1
    with atomic_write(truth_path) as handle:
        json.dump(ground_truth(spec, year, month, seed), handle, sort_keys=True, indent=2)
        handle.write("\n")
    return csv_path, truth_path, count
