"""Row builders shared across test modules."""

import csv

from fareanon.records import RAW_COLUMNS


def rail_row(
    serial="9100000000000001",
    tag_on="2023-03-06 08:10:23",
    tag_off="2023-03-06 08:40:00",
    agency_id="11",
    agency_name="Harborline Rail",
    route_id="",
    route_name="",
    on_id="1101",
    on_name="Fernhill",
    off_id="1105",
    off_name="Juniper Street",
    fare="3.80",
    product_id="10",
    product_name="Adult Cash Value",
):
    return [
        serial, tag_on, tag_off, agency_id, agency_name, route_id, route_name,
        on_id, on_name, off_id, off_name, fare, product_id, product_name,
    ]


def bus_row(**kw):
    kw.setdefault("tag_off", "")
    kw.setdefault("off_id", "")
    kw.setdefault("off_name", "")
    kw.setdefault("agency_id", "23")
    kw.setdefault("agency_name", "Crosstown Bus")
    kw.setdefault("route_id", "2351")
    kw.setdefault("route_name", "Line B")
    kw.setdefault("fare", "2.25")
    return rail_row(**kw)


def write_raw_csv(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(RAW_COLUMNS)
        writer.writerows(rows)
    return path


def read_csv_rows(path):
    """(header, data_rows) of any CSV file."""
    with open(path, "r", newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        return header, list(reader)
