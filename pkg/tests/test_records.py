from datetime import date, datetime, time

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fareanon.records import (
    DAY_NAMES,
    OUTPUT_COLUMNS,
    RAW_COLUMNS,
    AnonymizedRecord,
    day_name,
    day_of_week_id,
    format_money,
    parse_datetime,
    parse_money,
    raw_from_fields,
    raw_to_fields,
    record_from_fields,
    record_to_fields,
    validate_raw,
    validate_raw_fields,
    validate_record,
)
from helpers import bus_row, rail_row


def test_schema_column_counts():
    assert len(RAW_COLUMNS) == 14
    assert len(OUTPUT_COLUMNS) == 20


def test_output_header_is_frozen():
    # The published header is a compatibility contract, character for character.
    assert OUTPUT_COLUMNS == (
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


def test_day_of_week_convention():
    assert day_of_week_id(date(2023, 3, 5)) == 1  # a Sunday
    assert day_of_week_id(date(2023, 3, 6)) == 2
    assert day_of_week_id(date(2023, 3, 8)) == 4  # a Wednesday
    assert day_of_week_id(date(2023, 3, 11)) == 7  # a Saturday
    assert day_name(1) == "Sunday"
    assert day_name(4) == "Wednesday"
    assert day_name(7) == "Saturday"
    with pytest.raises(ValueError):
        day_name(0)
    with pytest.raises(ValueError):
        day_name(8)


def test_day_names_cover_a_whole_week():
    week = [day_name(day_of_week_id(date(2023, 3, 5 + i))) for i in range(7)]
    assert week == list(DAY_NAMES[1:])


def test_parse_money():
    assert parse_money("0") == 0
    assert parse_money("3") == 300
    assert parse_money("3.7") == 370
    assert parse_money("3.75") == 375
    assert parse_money("12.05") == 1205
    for bad in ("", "-1", "3.", ".5", "3.756", "1,50", "2.5e1", "nan"):
        assert parse_money(bad) is None


def test_format_money():
    assert format_money(0) == "0.00"
    assert format_money(5) == "0.05"
    assert format_money(370) == "3.70"
    assert format_money(1205) == "12.05"


@given(st.integers(min_value=0, max_value=10_000_00))
def test_money_round_trip(cents):
    assert parse_money(format_money(cents)) == cents


def test_parse_datetime_strict_format():
    assert parse_datetime("2023-03-06 08:10:23") == datetime(2023, 3, 6, 8, 10, 23)
    assert parse_datetime("2023-03-06T08:10:23") is None  # separator must be a space
    assert parse_datetime("2023-03-06 08:10") is None
    assert parse_datetime("2023-03-06 08:10:23.5") is None
    assert parse_datetime("2023-13-06 08:10:23") is None
    assert parse_datetime("") is None


def test_validate_raw_fields_accepts_good_rows():
    assert validate_raw_fields(rail_row()) == []
    assert validate_raw_fields(bus_row()) == []


def test_validate_raw_fields_rejections():
    assert validate_raw_fields(rail_row()[:13]) != []
    assert "card_serial empty" in validate_raw_fields(rail_row(serial=""))
    assert validate_raw_fields(rail_row(tag_on="yesterday")) != []
    # tag-off strictly before tag-on
    bad = rail_row(tag_on="2023-03-06 09:00:00", tag_off="2023-03-06 08:59:59")
    assert "tag_off precedes tag_on" in validate_raw_fields(bad)
    # equal timestamps are tolerated (zero-length rides exist in real feeds)
    same = rail_row(tag_on="2023-03-06 09:00:00", tag_off="2023-03-06 09:00:00")
    assert validate_raw_fields(same) == []
    assert "route pair incomplete" in validate_raw_fields(rail_row(route_id="5"))
    assert "tag_off fields incomplete" in validate_raw_fields(rail_row(tag_off=""))
    assert any("fare" in v for v in validate_raw_fields(rail_row(fare="-3.00")))
    assert any("agency_id" in v for v in validate_raw_fields(rail_row(agency_id="x")))


def test_raw_round_trip_preserves_fields():
    for fields in (rail_row(), bus_row()):
        record = raw_from_fields(fields)
        assert validate_raw(record) == []
        assert raw_to_fields(record) == fields


def test_raw_round_trip_with_embedded_comma():
    fields = rail_row(on_name="Millbank, North Gate")
    record = raw_from_fields(fields)
    assert record.tag_on_location_name == "Millbank, North Gate"
    assert raw_to_fields(record) == fields


def _record(**overrides):
    base = dict(
        ClipperCardID="AB" * 16,
        TripSequenceID=1,
        AgencyID=11,
        AgencyName="Harborline Rail",
        RouteID=None,
        RouteName=None,
        FareAmount=380,
        PaymentProductID=10,
        PaymentProductName="Adult Cash Value",
        TagOnTime_Time=time(8, 10),
        TagOnLocationId=1101,
        TagOnLocationName="Fernhill",
        TagOffTime_Time=time(8, 40),
        TagOffLocationId=1105,
        TagOffLocationName="Juniper Street",
        Year=2023,
        Month=3,
        DayOfWeekID=2,
        DayOfWeek="Monday",
        RandomWeekID=4,
    )
    base.update(overrides)
    return AnonymizedRecord(**base)


def test_validate_record():
    assert validate_record(_record()) == []
    assert validate_record(_record(TagOnTime_Time=time(8, 15))) != []
    assert validate_record(_record(TagOnTime_Time=time(8, 15)), granularity_minutes=5) == []
    assert validate_record(_record(TagOnTime_Time=time(8, 10, 30))) != []
    assert validate_record(_record(DayOfWeek="Tuesday")) != []
    assert validate_record(_record(DayOfWeekID=0)) != []
    assert validate_record(_record(TripSequenceID=0)) != []
    assert validate_record(_record(RandomWeekID=0)) != []
    assert validate_record(_record(Month=13)) != []


def test_record_fields_round_trip():
    record = _record()
    fields = record_to_fields(record)
    assert len(fields) == 20
    assert record_from_fields(fields) == record
    # optional tag-off triple serializes to empty cells
    bus = _record(TagOffTime_Time=None, TagOffLocationId=None, TagOffLocationName=None)
    fields = record_to_fields(bus)
    assert fields[12] == "" and fields[13] == "" and fields[14] == ""
    assert record_from_fields(fields) == bus
