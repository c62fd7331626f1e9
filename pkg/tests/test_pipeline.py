import json
from datetime import date

import pytest

from fareanon.config import AnonymizationConfig, key_fingerprint
from fareanon.errors import DataValidationError, FareanonError, OutputCollisionError
from fareanon.pipeline import anonymize, month_file_name
from fareanon.pseudonym import pseudonymize
from fareanon.rawio import sha256_file
from fareanon.records import OUTPUT_COLUMNS
from fareanon.sampling import build_month_plan, round_half_up, sample_cards
from helpers import bus_row, rail_row, read_csv_rows, write_raw_csv

KEY = bytes(range(32))


def _passthrough_config(seed=3):
    # Keep every date and every card: content transforms, nothing is dropped
    return AnonymizationConfig(
        secret_key=KEY, run_seed=seed, card_sample_rate=1.0, weekday_keep_count=None
    )


def test_month_file_name():
    assert month_file_name(2023, 3) == "anon_2023_03.csv"
    assert month_file_name(2023, 11) == "anon_2023_11.csv"


def test_single_card_day_end_to_end(tmp_path):
    serial = "9100000000000042"
    rows = [
        bus_row(
            serial=serial,
            tag_on="2023-03-06 08:14:59",
            on_id="2302",
            on_name="Cedar & 1st",
            fare="2.25",
        ),
        bus_row(
            serial=serial,
            tag_on="2023-03-06 08:19:01",
            on_id="2303",
            on_name="Dogwood & 1st",
            fare="2.2",
        ),
        # after midnight: circadian day is still Monday March 6
        rail_row(
            serial=serial,
            tag_on="2023-03-07 01:30:00",
            tag_off="2023-03-07 02:05:10",
            fare="3.80",
        ),
    ]
    raw = write_raw_csv(tmp_path / "raw.csv", rows)
    config = _passthrough_config()
    result = anonymize(raw, tmp_path / "out", config)

    assert result.input_rows == 3
    assert result.output_rows == 3
    assert [m.path.name for m in result.months] == ["anon_2023_03.csv"]

    header, data = read_csv_rows(result.months[0].path)
    assert tuple(header) == OUTPUT_COLUMNS
    assert len(data) == 3

    service = date(2023, 3, 6)
    plan = build_month_plan(2023, 3, config)
    week_id = str(plan.date_id_map[service])
    pseudo = pseudonymize(serial, service, KEY)

    assert data[0] == [
        pseudo, "1", "23", "Crosstown Bus", "2351", "Line B", "2.25", "10",
        "Adult Cash Value", "08:10:00", "2302", "Cedar & 1st", "", "", "",
        "2023", "3", "2", "Monday", week_id,
    ]
    # "2.2" normalizes to two decimal places; same truncated bucket as trip 1
    # but the sequence follows true time order
    assert data[1] == [
        pseudo, "2", "23", "Crosstown Bus", "2351", "Line B", "2.20", "10",
        "Adult Cash Value", "08:10:00", "2303", "Dogwood & 1st", "", "", "",
        "2023", "3", "2", "Monday", week_id,
    ]
    # the late-night trip keeps Monday's weekday and week ID
    assert data[2] == [
        pseudo, "3", "11", "Harborline Rail", "", "", "3.80", "10",
        "Adult Cash Value", "01:30:00", "1101", "Fernhill", "02:00:00", "1105",
        "Juniper Street", "2023", "3", "2", "Monday", week_id,
    ]


def test_output_ordered_by_week_card_sequence(tmp_path):
    rows = []
    for day in (6, 7, 8, 13, 20, 27):  # Mondays and a few Tuesdays
        for idx in range(5):
            serial = str(9100000000000000 + idx)
            rows.append(
                bus_row(serial=serial, tag_on=f"2023-03-{day:02d} 09:{idx:02d}:00")
            )
            rows.append(
                bus_row(serial=serial, tag_on=f"2023-03-{day:02d} 17:{idx:02d}:00")
            )
    raw = write_raw_csv(tmp_path / "raw.csv", rows)
    result = anonymize(raw, tmp_path / "out", _passthrough_config())
    _, data = read_csv_rows(result.months[0].path)
    keys = [(int(r[19]), r[0], int(r[1])) for r in data]
    assert keys == sorted(keys)


def test_byte_determinism_across_runs_and_threads(tmp_path):
    rows = []
    for day in range(6, 12):
        for idx in range(8):
            serial = str(9100000000000000 + idx)
            rows.append(bus_row(serial=serial, tag_on=f"2023-03-{day:02d} 08:0{idx}:30"))
            rows.append(
                rail_row(
                    serial=serial,
                    tag_on=f"2023-03-{day:02d} 18:1{idx}:00",
                    tag_off=f"2023-03-{day:02d} 18:4{idx}:00",
                )
            )
    raw = write_raw_csv(tmp_path / "raw.csv", rows)
    config = AnonymizationConfig(secret_key=KEY, run_seed=11)

    r1 = anonymize(raw, tmp_path / "a", config, threads=1)
    r2 = anonymize(raw, tmp_path / "b", config, threads=3)
    r3 = anonymize(raw, tmp_path / "c", config, threads=1)
    assert [m.digest for m in r1.months] == [m.digest for m in r2.months]
    assert [m.digest for m in r1.months] == [m.digest for m in r3.months]
    assert (tmp_path / "a" / "private" / "manifest.json").read_bytes() == (
        tmp_path / "b" / "private" / "manifest.json"
    ).read_bytes()
    # a different seed moves the outputs
    r4 = anonymize(raw, tmp_path / "d", AnonymizationConfig(secret_key=KEY, run_seed=12))
    assert [m.digest for m in r4.months] != [m.digest for m in r1.months]


def test_sampling_matches_independent_recomputation(tmp_path):
    # Dual route: the pipeline's retained dates and card counts must equal
    # what the sampling primitives say when called directly.
    rows = []
    for day in range(1, 32):
        for idx in range(20):
            serial = str(9100000000000000 + idx)
            rows.append(bus_row(serial=serial, tag_on=f"2023-03-{day:02d} 12:{idx:02d}:00"))
    raw = write_raw_csv(tmp_path / "raw.csv", rows)
    config = AnonymizationConfig(secret_key=KEY, run_seed=21)
    result = anonymize(raw, tmp_path / "out", config)

    manifest = json.loads(result.manifest_path.read_text())
    info = manifest["months"]["2023-03"]
    plan = build_month_plan(2023, 3, config)
    assert set(info["retained_dates"]) == {d.isoformat() for d in plan.retained_dates}
    assert len(info["retained_dates"]) == 21

    _, data = read_csv_rows(result.months[0].path)
    by_week = {}
    for row in data:
        by_week.setdefault(int(row[19]), set()).add(row[0])
    for iso, stats in info["dates"].items():
        service = date.fromisoformat(iso)
        expected_cards = sample_cards(
            [str(9100000000000000 + idx) for idx in range(20)], 0.5, 21, service
        )
        assert stats["retained_cards"] == len(expected_cards) == 10
        assert stats["active_cards"] == 20
        week_id = plan.date_id_map[service]
        expected_pseudos = {pseudonymize(s, service, KEY) for s in expected_cards}
        assert by_week[week_id] == expected_pseudos


def test_retained_card_count_rounds_half_up(tmp_path):
    # 11 active cards at rate 0.5 keeps 6; keep every date so the day is present
    rows = [
        bus_row(serial=str(9100000000000000 + idx), tag_on="2023-03-06 09:00:00")
        for idx in range(11)
    ]
    raw = write_raw_csv(tmp_path / "raw.csv", rows)
    config = AnonymizationConfig(
        secret_key=KEY, run_seed=2, card_sample_rate=0.5, weekday_keep_count=None
    )
    result = anonymize(raw, tmp_path / "out", config)
    manifest = json.loads(result.manifest_path.read_text())
    stats = manifest["months"]["2023-03"]["dates"]["2023-03-06"]
    assert stats["retained_cards"] == round_half_up(0.5 * 11) == 6
    assert result.output_rows == 6


def test_rows_crossing_months_route_to_service_month(tmp_path):
    rows = [
        # 01:20 on April 1st belongs to March 31st's service day
        bus_row(serial="9100000000000001", tag_on="2023-04-01 01:20:00"),
        bus_row(serial="9100000000000001", tag_on="2023-03-31 23:00:00"),
        bus_row(serial="9100000000000002", tag_on="2023-04-03 09:00:00"),
    ]
    raw = write_raw_csv(tmp_path / "raw.csv", rows)
    result = anonymize(raw, tmp_path / "out", _passthrough_config())
    names = sorted(m.path.name for m in result.months)
    assert names == ["anon_2023_03.csv", "anon_2023_04.csv"]
    _, march = read_csv_rows(tmp_path / "out" / "anon_2023_03.csv")
    _, april = read_csv_rows(tmp_path / "out" / "anon_2023_04.csv")
    assert len(march) == 2  # both March 31st service rows
    assert len(april) == 1
    assert {r[16] for r in march} == {"3"}
    assert {r[16] for r in april} == {"4"}
    # the two March rows share a pseudonym and carry sequence 1, 2 by true time
    assert march[0][0] == march[1][0]
    assert [march[0][1], march[1][1]] == ["1", "2"]
    assert march[0][9] == "23:00:00" and march[1][9] == "01:20:00"


def test_fail_fast_on_invalid_row(tmp_path):
    rows = [rail_row(), rail_row(fare="-4.00"), rail_row()]
    raw = write_raw_csv(tmp_path / "raw.csv", rows)
    with pytest.raises(DataValidationError) as info:
        anonymize(raw, tmp_path / "out", _passthrough_config())
    assert info.value.row_number == 2


def test_skip_invalid_counts_and_continues(tmp_path):
    rows = [
        rail_row(tag_on="2023-03-06 08:00:00"),
        rail_row(fare="-4.00"),
        rail_row(tag_on="not a time"),
        rail_row(
            serial="9100000000000002",
            tag_on="2023-03-06 09:00:00",
            tag_off="2023-03-06 09:30:00",
        ),
    ]
    raw = write_raw_csv(tmp_path / "raw.csv", rows)
    result = anonymize(raw, tmp_path / "out", _passthrough_config(), skip_invalid=True)
    assert result.skipped_rows == 2
    assert result.input_rows == 2
    assert result.output_rows == 2


def test_collision_refused_then_forced(tmp_path):
    raw = write_raw_csv(tmp_path / "raw.csv", [rail_row()])
    config = _passthrough_config()
    first = anonymize(raw, tmp_path / "out", config)
    with pytest.raises(OutputCollisionError):
        anonymize(raw, tmp_path / "out", config)
    forced = anonymize(raw, tmp_path / "out", config, force=True)
    assert forced.months[0].digest == first.months[0].digest


def test_collision_on_month_file_without_manifest(tmp_path):
    raw = write_raw_csv(tmp_path / "raw.csv", [rail_row()])
    out = tmp_path / "out"
    out.mkdir()
    (out / "anon_2023_03.csv").write_text("pre-existing\n")
    with pytest.raises(OutputCollisionError):
        anonymize(raw, out, _passthrough_config())


def test_missing_input_raises(tmp_path):
    with pytest.raises(FareanonError):
        anonymize(tmp_path / "absent.csv", tmp_path / "out", _passthrough_config())


def test_empty_input_produces_empty_release(tmp_path):
    raw = write_raw_csv(tmp_path / "raw.csv", [])
    result = anonymize(raw, tmp_path / "out", _passthrough_config())
    assert result.months == []
    assert result.output_rows == 0
    manifest = json.loads(result.manifest_path.read_text())
    assert manifest["months"] == {}


def test_manifest_contents(tmp_path):
    rows = [
        bus_row(serial="9100000000000001", tag_on="2023-03-06 08:00:00"),
        bus_row(serial="9100000000000002", tag_on="2023-03-06 09:00:00"),
    ]
    raw = write_raw_csv(tmp_path / "raw.csv", rows)
    config = _passthrough_config(seed=5)
    result = anonymize(raw, tmp_path / "out", config)
    manifest = json.loads(result.manifest_path.read_text())

    assert manifest["config"]["key_fingerprint"] == key_fingerprint(KEY)
    assert manifest["config_digest"] == result.config_digest
    assert manifest["input"]["file"] == "raw.csv"
    assert manifest["input"]["rows"] == 2
    info = manifest["months"]["2023-03"]
    assert info["output_file"] == "anon_2023_03.csv"
    assert info["digest"] == sha256_file(result.months[0].path)
    assert sorted(info["date_id_map"]) == info["retained_dates"]
    assert info["dates"]["2023-03-06"]["active_cards"] == 2
    # key bytes never appear anywhere in the manifest
    assert KEY.hex() not in result.manifest_path.read_text()


def test_manifest_is_private_not_published(tmp_path):
    raw = write_raw_csv(tmp_path / "raw.csv", [rail_row()])
    result = anonymize(raw, tmp_path / "out", _passthrough_config())
    assert result.manifest_path.parent.name == "private"
    published = [p.name for p in (tmp_path / "out").iterdir() if p.is_file()]
    assert published == ["anon_2023_03.csv"]
