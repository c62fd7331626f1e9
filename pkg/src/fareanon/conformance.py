"""Conformance checking of published monthly datasets."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

from .errors import FareanonError
from .records import DAY_NAMES, OUTPUT_COLUMNS, parse_money

_MAX_DETAILED = 100

_INT_COLUMNS = {
    1: "TripSequenceID",
    2: "AgencyID",
    7: "PaymentProductID",
    10: "TagOnLocationId",
    15: "Year",
    16: "Month",
    17: "DayOfWeekID",
    19: "RandomWeekID",
}


@dataclass
class ConformanceReport:
    """Outcome of validate_output: violations are data, not exceptions."""

    path: str
    row_count: int = 0
    violation_count: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.violation_count == 0

    def add(self, message: str) -> None:
        self.violation_count += 1
        if len(self.violations) < _MAX_DETAILED:
            self.violations.append(message)

    def summary(self) -> str:
        status = "OK" if self.ok else f"{self.violation_count} violation(s)"
        lines = [f"{self.path}: {self.row_count} rows, {status}"]
        lines.extend(f"  - {v}" for v in self.violations)
        if self.violation_count > len(self.violations):
            lines.append(f"  ... and {self.violation_count - len(self.violations)} more")
        return "\n".join(lines)


def _check_time(report: ConformanceReport, row: int, label: str, value: str, granularity: int) -> None:
    if (
        len(value) != 8
        or value[2] != ":"
        or value[5] != ":"
        or not (value[:2] + value[3:5] + value[6:]).isdigit()
        or not 0 <= int(value[:2]) <= 23
        or int(value[3:5]) > 59
    ):
        report.add(f"row {row}: {label} is not a valid HH:MM:SS time: {value!r}")
        return
    if int(value[3:5]) % granularity != 0 or value[6:] != "00":
        report.add(f"row {row}: {label} not truncated to {granularity} minutes: {value!r}")


def validate_output(path: str | Path, granularity_minutes: int = 10) -> ConformanceReport:
    """Check one monthly dataset against the published-schema contract.

    Checks: exact twenty-column header; truncated time fields; contiguous
    per-card-day TripSequenceIDs; constant Year/Month; contiguous
    RandomWeekID range; weekday name/number consistency (and constancy of
    the whole day tuple per RandomWeekID). Violations are collected, not
    raised.
    """
    p = Path(path)
    if not p.exists():
        raise FareanonError(f"dataset not found: {p}")
    report = ConformanceReport(path=str(p))

    year_month: tuple[str, str] | None = None
    day_tuple_by_id: dict[int, tuple[str, str]] = {}
    seqs_by_card_day: dict[tuple[int, str], list[int]] = {}
    week_ids: set[int] = set()

    with open(p, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            report.add("file is empty, expected a header row")
            return report
        if tuple(header) != OUTPUT_COLUMNS:
            report.add(
                f"header mismatch: expected {','.join(OUTPUT_COLUMNS)}; got {','.join(header)}"
            )
            return report

        for number, fields in enumerate(reader, start=1):
            report.row_count += 1
            if len(fields) != len(OUTPUT_COLUMNS):
                report.add(f"row {number}: expected {len(OUTPUT_COLUMNS)} fields, got {len(fields)}")
                continue

            ints: dict[int, int] = {}
            for idx, label in _INT_COLUMNS.items():
                if fields[idx].lstrip("-").isdigit():
                    ints[idx] = int(fields[idx])
                else:
                    report.add(f"row {number}: {label} is not an integer: {fields[idx]!r}")
            if len(ints) != len(_INT_COLUMNS):
                continue

            if not fields[0]:
                report.add(f"row {number}: ClipperCardID is empty")
            if parse_money(fields[6]) is None:
                report.add(f"row {number}: FareAmount is not an amount: {fields[6]!r}")

            _check_time(report, number, "TagOnTime_Time", fields[9], granularity_minutes)
            off_absent = (fields[12] == "", fields[13] == "", fields[14] == "")
            if any(off_absent) and not all(off_absent):
                report.add(f"row {number}: tag-off fields present only in part")
            if fields[12]:
                _check_time(report, number, "TagOffTime_Time", fields[12], granularity_minutes)

            if year_month is None:
                year_month = (fields[15], fields[16])
            elif (fields[15], fields[16]) != year_month:
                report.add(
                    f"row {number}: Year/Month {fields[15]}/{fields[16]} differ from "
                    f"{year_month[0]}/{year_month[1]} seen earlier in the file"
                )

            dow_id = ints[17]
            if not 1 <= dow_id <= 7:
                report.add(f"row {number}: DayOfWeekID out of range: {dow_id}")
            elif fields[18] != DAY_NAMES[dow_id]:
                report.add(
                    f"row {number}: DayOfWeek {fields[18]!r} does not match DayOfWeekID {dow_id}"
                )

            week_id = ints[19]
            week_ids.add(week_id)
            day_tuple = (fields[17], fields[18])
            seen = day_tuple_by_id.setdefault(week_id, day_tuple)
            if seen != day_tuple:
                report.add(
                    f"row {number}: RandomWeekID {week_id} carries weekday {day_tuple}, "
                    f"but earlier rows carried {seen}"
                )

            seqs_by_card_day.setdefault((week_id, fields[0]), []).append(ints[1])

    for (week_id, card), seqs in seqs_by_card_day.items():
        if sorted(seqs) != list(range(1, len(seqs) + 1)):
            report.add(
                f"RandomWeekID {week_id} card {card}: TripSequenceIDs {sorted(seqs)} "
                f"are not exactly 1..{len(seqs)}"
            )

    if week_ids and week_ids != set(range(1, max(week_ids) + 1)):
        missing = sorted(set(range(1, max(week_ids) + 1)) - week_ids)
        report.add(f"RandomWeekID values are not contiguous 1..{max(week_ids)}: missing {missing}")

    return report
