"""Raw-transaction CSV reading/writing and file helpers.

Raw files are headered UTF-8 CSV with RFC-4180 quoting, one transaction per
row, datetimes as 'YYYY-MM-DD HH:MM:SS' local civil time, absent optionals
as empty strings. The exact header doubles as the schema-level PII check: a
file with any extra column is rejected outright.
"""

from __future__ import annotations

import csv
import hashlib
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Iterable, Iterator

from .errors import DataValidationError, FareanonError
from .records import RAW_COLUMNS, RawTransaction, raw_from_fields, raw_to_fields, validate_raw_fields

_READ_BUFFER = 1 << 20


@contextmanager
def atomic_write(path: str | Path) -> Iterator[IO[str]]:
    """Write a text file atomically: temp file in the same directory + rename."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(
        prefix=f".{target.name}.", suffix=".tmp", dir=target.parent, text=True
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            yield handle
        os.replace(tmp_name, target)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        while chunk := handle.read(_READ_BUFFER):
            digest.update(chunk)
    return digest.hexdigest()


def check_raw_header(header: list[str] | None, path: Path) -> None:
    if header is None:
        raise FareanonError(f"{path}: empty file, expected a raw header row")
    if tuple(header) != RAW_COLUMNS:
        raise FareanonError(
            f"{path}: header does not match the raw schema "
            f"(expected {','.join(RAW_COLUMNS)}; got {','.join(header)}). "
            "Unknown columns are rejected so no PII-bearing field can slip in."
        )


def read_raw(path: str | Path) -> Iterator[RawTransaction]:
    """Stream validated transactions from a raw CSV file.

    Fails fast with the 1-based data row number on the first invalid row.
    """
    p = Path(path)
    if not p.exists():
        raise FareanonError(f"raw input not found: {p}")
    handle = open(p, "r", encoding="utf-8", newline="")
    reader = csv.reader(handle)
    check_raw_header(next(reader, None), p)

    def rows() -> Iterator[RawTransaction]:
        try:
            for number, fields in enumerate(reader, start=1):
                violations = validate_raw_fields(fields)
                if violations:
                    raise DataValidationError(number, violations)
                yield raw_from_fields(fields)
        finally:
            handle.close()

    return rows()


def write_raw(records: Iterable[RawTransaction], path: str | Path) -> int:
    """Write transactions to a raw CSV file atomically; returns the row count."""
    count = 0
    with atomic_write(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(RAW_COLUMNS)
        for record in records:
            writer.writerow(raw_to_fields(record))
            count += 1
    return count
