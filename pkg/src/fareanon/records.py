"""Domain types for raw fare transactions and anonymized output rows.

The output schema is the published twenty-column contract; its column names
are reproduced byte-for-byte, including their mixed capitalization
(``TagOnLocationId`` vs ``ClipperCardID``), because downstream consumers key
on the exact header.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime, time
from typing import Sequence

# Raw input CSV columns, in file order.
RAW_COLUMNS = (
    "card_serial",
    "tag_on_at",
    "tag_off_at",
    "agency_id",
    "agency_name",
    "route_id",
    "route_name",
    "tag_on_location_id",
    "tag_on_location_name",
    "tag_off_location_id",
    "tag_off_location_name",
    "fare_amount",
    "payment_product_id",
    "payment_product_name",
)

# Published output columns, in file order. Do not edit: the header is a
# compatibility contract.
OUTPUT_COLUMNS = (
    "ClipperCardID",
    "TripSequenceID",
    "AgencyID",
    "AgencyName",
    "RouteID",
    "RouteName",
    "FareAmount",
    "PaymentProductID",
    "PaymentProductName",
    "TagOnTime_Time",
    "TagOnLocationId",
    "TagOnLocationName",
    "TagOffTime_Time",
    "TagOffLocationId",
    "TagOffLocationName",
    "Year",
    "Month",
    "DayOfWeekID",
    "DayOfWeek",
    "RandomWeekID",
)

# DayOfWeekID convention: 1=Sunday .. 7=Saturday (index 0 unused).
DAY_NAMES = (
    "",
    "Sunday",
    "Monday",
    "Tuesday",
    "Wednesday",
    "Thursday",
    "Friday",
    "Saturday",
)

DATETIME_FORMAT = "%Y-%m-%d %H:%M:%S"


def day_of_week_id(d: date) -> int:
    """Weekday number under the 1=Sunday .. 7=Saturday convention."""
    return d.isoweekday() % 7 + 1


def day_name(dow_id: int) -> str:
    if not 1 <= dow_id <= 7:
        raise ValueError(f"DayOfWeekID out of range: {dow_id}")
    return DAY_NAMES[dow_id]


def parse_money(text: str) -> int | None:
    """Parse a non-negative decimal amount into integer cents.

    Accepts "0", "3", "3.7", "3.75". Returns None if the text is not a
    plain non-negative decimal with at most two fractional digits.
    """
    whole, dot, frac = text.partition(".")
    if not whole.isdigit():
        return None
    if dot and (not frac.isdigit() or len(frac) > 2):
        return None
    cents = int(whole) * 100
    if frac:
        cents += int(frac) * (10 if len(frac) == 1 else 1)
    return cents


def format_money(cents: int) -> str:
    """Render integer cents as a two-place decimal string."""
    return f"{cents // 100}.{cents % 100:02d}"


def parse_datetime(text: str) -> datetime | None:
    """Parse the raw-file datetime format 'YYYY-MM-DD HH:MM:SS' strictly."""
    if len(text) != 19 or text[10] != " ":
        return None
    try:
        return datetime.fromisoformat(text)
    except ValueError:
        return None


@dataclass(frozen=True, slots=True)
class RawTransaction:
    """One pre-anonymization fare event.

    `card_serial` is the true card identifier and never reaches any output;
    `fare_cents` keeps money exact (no binary floating point anywhere).
    """

    card_serial: str
    tag_on_at: datetime
    tag_off_at: datetime | None
    agency_id: int
    agency_name: str
    route_id: int | None
    route_name: str | None
    tag_on_location_id: int
    tag_on_location_name: str
    tag_off_location_id: int | None
    tag_off_location_name: str | None
    fare_cents: int
    payment_product_id: int
    payment_product_name: str


def validate_raw(record: RawTransaction) -> list[str]:
    """Check a parsed transaction against the input invariants.

    Returns the list of violated rules; an empty list means the record is
    acceptable to every downstream stage. Violations are data, not errors.
    """
    violations: list[str] = []
    if record.tag_off_at is not None and record.tag_off_at < record.tag_on_at:
        violations.append("tag_off precedes tag_on")
    if (record.route_id is None) != (record.route_name is None):
        violations.append("route pair incomplete")
    off_parts = (
        record.tag_off_at is None,
        record.tag_off_location_id is None,
        record.tag_off_location_name is None,
    )
    if any(off_parts) and not all(off_parts):
        violations.append("tag_off fields incomplete")
    if record.fare_cents < 0:
        violations.append("fare_amount negative")
    if not record.card_serial:
        violations.append("card_serial empty")
    return violations


def validate_raw_fields(fields: Sequence[str]) -> list[str]:
    """String-level validator for one raw CSV row (streaming fast path).

    Applies the same rules as validate_raw plus parseability of every
    field. Optional fields are absent when the cell is the empty string.
    """
    if len(fields) != len(RAW_COLUMNS):
        return [f"expected {len(RAW_COLUMNS)} fields, got {len(fields)}"]
    (
        serial,
        tag_on,
        tag_off,
        agency_id,
        agency_name,
        route_id,
        route_name,
        on_loc_id,
        on_loc_name,
        off_loc_id,
        off_loc_name,
        fare,
        product_id,
        product_name,
    ) = fields

    violations: list[str] = []
    if not serial:
        violations.append("card_serial empty")
    if parse_datetime(tag_on) is None:
        violations.append(f"tag_on_at not a datetime: {tag_on!r}")
    if tag_off:
        if parse_datetime(tag_off) is None:
            violations.append(f"tag_off_at not a datetime: {tag_off!r}")
        elif tag_off < tag_on:
            # Fixed-width zero-padded format: string order is time order.
            violations.append("tag_off precedes tag_on")
    if not agency_id.lstrip("-").isdigit():
        violations.append(f"agency_id not an integer: {agency_id!r}")
    if not agency_name:
        violations.append("agency_name empty")
    if (route_id == "") != (route_name == ""):
        violations.append("route pair incomplete")
    if route_id and not route_id.lstrip("-").isdigit():
        violations.append(f"route_id not an integer: {route_id!r}")
    if not on_loc_id.lstrip("-").isdigit():
        violations.append(f"tag_on_location_id not an integer: {on_loc_id!r}")
    if not on_loc_name:
        violations.append("tag_on_location_name empty")
    off_absent = (tag_off == "", off_loc_id == "", off_loc_name == "")
    if any(off_absent) and not all(off_absent):
        violations.append("tag_off fields incomplete")
    if off_loc_id and not off_loc_id.lstrip("-").isdigit():
        violations.append(f"tag_off_location_id not an integer: {off_loc_id!r}")
    if parse_money(fare) is None:
        violations.append(f"fare_amount not a non-negative amount: {fare!r}")
    if not product_id.lstrip("-").isdigit():
        violations.append(f"payment_product_id not an integer: {product_id!r}")
    if not product_name:
        violations.append("payment_product_name empty")
    return violations


def raw_from_fields(fields: Sequence[str]) -> RawTransaction:
    """Build a RawTransaction from validated CSV fields."""
    tag_on = parse_datetime(fields[1])
    if tag_on is None:
        raise ValueError(f"bad tag_on_at: {fields[1]!r}")
    tag_off = parse_datetime(fields[2]) if fields[2] else None
    fare = parse_money(fields[11])
    if fare is None:
        raise ValueError(f"bad fare_amount: {fields[11]!r}")
    return RawTransaction(
        card_serial=fields[0],
        tag_on_at=tag_on,
        tag_off_at=tag_off,
        agency_id=int(fields[3]),
        agency_name=fields[4],
        route_id=int(fields[5]) if fields[5] else None,
        route_name=fields[6] if fields[6] else None,
        tag_on_location_id=int(fields[7]),
        tag_on_location_name=fields[8],
        tag_off_location_id=int(fields[9]) if fields[9] else None,
        tag_off_location_name=fields[10] if fields[10] else None,
        fare_cents=fare,
        payment_product_id=int(fields[12]),
        payment_product_name=fields[13],
    )


def raw_to_fields(record: RawTransaction) -> list[str]:
    """Serialize a RawTransaction to raw CSV fields (lossless round-trip)."""
    return [
        record.card_serial,
        record.tag_on_at.strftime(DATETIME_FORMAT),
        record.tag_off_at.strftime(DATETIME_FORMAT) if record.tag_off_at else "",
        str(record.agency_id),
        record.agency_name,
        str(record.route_id) if record.route_id is not None else "",
        record.route_name if record.route_name is not None else "",
        str(record.tag_on_location_id),
        record.tag_on_location_name,
        str(record.tag_off_location_id) if record.tag_off_location_id is not None else "",
        record.tag_off_location_name if record.tag_off_location_name is not None else "",
        format_money(record.fare_cents),
        str(record.payment_product_id),
        record.payment_product_name,
    ]


@dataclass(frozen=True, slots=True)
class AnonymizedRecord:
    """One published output row.

    Attribute names mirror the published column names exactly so the
    dataclass-to-CSV mapping cannot drift. FareAmount is integer cents.
    """

    ClipperCardID: str
    TripSequenceID: int
    AgencyID: int
    AgencyName: str
    RouteID: int | None
    RouteName: str | None
    FareAmount: int
    PaymentProductID: int
    PaymentProductName: str
    TagOnTime_Time: time
    TagOnLocationId: int
    TagOnLocationName: str
    TagOffTime_Time: time | None
    TagOffLocationId: int | None
    TagOffLocationName: str | None
    Year: int
    Month: int
    DayOfWeekID: int
    DayOfWeek: str
    RandomWeekID: int


def validate_record(record: AnonymizedRecord, granularity_minutes: int = 10) -> list[str]:
    """Check one output row against the schema invariants."""
    violations: list[str] = []
    for label, t in (("TagOnTime_Time", record.TagOnTime_Time), ("TagOffTime_Time", record.TagOffTime_Time)):
        if t is None:
            continue
        if t.minute % granularity_minutes != 0 or t.second != 0 or t.microsecond != 0:
            violations.append(f"{label} not truncated to {granularity_minutes} minutes: {t}")
    if not 1 <= record.DayOfWeekID <= 7:
        violations.append(f"DayOfWeekID out of range: {record.DayOfWeekID}")
    elif record.DayOfWeek != DAY_NAMES[record.DayOfWeekID]:
        violations.append(
            f"DayOfWeek {record.DayOfWeek!r} does not match DayOfWeekID {record.DayOfWeekID}"
        )
    if not 1 <= record.Month <= 12:
        violations.append(f"Month out of range: {record.Month}")
    if record.TripSequenceID < 1:
        violations.append(f"TripSequenceID not positive: {record.TripSequenceID}")
    if record.RandomWeekID < 1:
        violations.append(f"RandomWeekID not positive: {record.RandomWeekID}")
    return violations


def record_to_fields(record: AnonymizedRecord) -> list[str]:
    return [
        record.ClipperCardID,
        str(record.TripSequenceID),
        str(record.AgencyID),
        record.AgencyName,
        str(record.RouteID) if record.RouteID is not None else "",
        record.RouteName if record.RouteName is not None else "",
        format_money(record.FareAmount),
        str(record.PaymentProductID),
        record.PaymentProductName,
        record.TagOnTime_Time.strftime("%H:%M:%S"),
        str(record.TagOnLocationId),
        record.TagOnLocationName,
        record.TagOffTime_Time.strftime("%H:%M:%S") if record.TagOffTime_Time else "",
        str(record.TagOffLocationId) if record.TagOffLocationId is not None else "",
        record.TagOffLocationName if record.TagOffLocationName is not None else "",
        str(record.Year),
        str(record.Month),
        str(record.DayOfWeekID),
        record.DayOfWeek,
        str(record.RandomWeekID),
    ]


def record_from_fields(fields: Sequence[str]) -> AnonymizedRecord:
    if len(fields) != len(OUTPUT_COLUMNS):
        raise ValueError(f"expected {len(OUTPUT_COLUMNS)} fields, got {len(fields)}")
    fare = parse_money(fields[6])
    if fare is None:
        raise ValueError(f"bad FareAmount: {fields[6]!r}")
    return AnonymizedRecord(
        ClipperCardID=fields[0],
        TripSequenceID=int(fields[1]),
        AgencyID=int(fields[2]),
        AgencyName=fields[3],
        RouteID=int(fields[4]) if fields[4] else None,
        RouteName=fields[5] if fields[5] else None,
        FareAmount=fare,
        PaymentProductID=int(fields[7]),
        PaymentProductName=fields[8],
        TagOnTime_Time=time.fromisoformat(fields[9]),
        TagOnLocationId=int(fields[10]),
        TagOnLocationName=fields[11],
        TagOffTime_Time=time.fromisoformat(fields[12]) if fields[12] else None,
        TagOffLocationId=int(fields[13]) if fields[13] else None,
        TagOffLocationName=fields[14] if fields[14] else None,
        Year=int(fields[15]),
        Month=int(fields[16]),
        DayOfWeekID=int(fields[17]),
        DayOfWeek=fields[18],
        RandomWeekID=int(fields[19]),
    )
