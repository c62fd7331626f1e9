"""Streaming anonymization pipeline: raw CSV in, monthly datasets out.

Stage order per record: circadian-day assignment, month assignment, retained-
date filter, retained-card filter, per-card-day trip sequencing, pseudonym
substitution, time truncation, date-field attachment, ordered emit. Rows are
spilled to one temp file per retained service date, so memory is bounded by
the largest single day and dates can be processed in parallel; the final
merge is ordered by (RandomWeekID, ClipperCardID, TripSequenceID), which
makes output bytes independent of worker scheduling.
"""

from __future__ import annotations

import csv
import json
import logging
import shutil
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

from .config import AnonymizationConfig, config_digest, public_config_dict
from .errors import DataValidationError, FareanonError, OutputCollisionError
from .pseudonym import pseudonymize
from .rawio import atomic_write, check_raw_header, sha256_file
from .records import (
    OUTPUT_COLUMNS,
    day_name,
    day_of_week_id,
    format_money,
    parse_money,
    validate_raw_fields,
)
from .sampling import MonthPlan, build_month_plan, sample_cards
from .temporal import sequence_ranks, truncate_hms

logger = logging.getLogger(__name__)

MANIFEST_VERSION = 1
PRIVATE_DIR = "private"
MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class DateStats:
    """Per-service-date accounting, kept in the private manifest."""

    service_date: str
    input_rows: int
    active_cards: int
    retained_cards: int
    output_rows: int


@dataclass(frozen=True)
class MonthOutput:
    year: int
    month: int
    path: Path
    digest: str
    row_count: int


@dataclass
class RunResult:
    months: list[MonthOutput]
    manifest_path: Path
    config_digest: str
    input_rows: int
    skipped_rows: int
    dropped_date_rows: int
    dropped_card_rows: int
    output_rows: int


def month_file_name(year: int, month: int) -> str:
    return f"anon_{year:04d}_{month:02d}.csv"


def _process_date(args: tuple) -> tuple[str, int, int, int, int]:
    """Anonymize one service date's spilled rows into a part file.

    Self-contained so dates can run in separate processes: recomputes the
    active-card set from its own spill, samples cards, sequences trips,
    pseudonymizes, truncates, and writes rows sorted by (pseudonym, seq).
    Returns (service_iso, input_rows, active_cards, retained_cards, out_rows).
    """
    (
        spill_path,
        part_path,
        service_iso,
        key,
        run_seed,
        rate,
        granularity,
        week_id,
        year,
        month,
    ) = args
    service_date = date.fromisoformat(service_iso)
    dow_id = day_of_week_id(service_date)
    dow_name = day_name(dow_id)

    groups: dict[str, list[list[str]]] = {}
    row_total = 0
    with open(spill_path, "r", encoding="utf-8", newline="") as handle:
        for fields in csv.reader(handle):
            row_total += 1
            groups.setdefault(fields[0], []).append(fields)

    retained = sample_cards(groups.keys(), rate, run_seed, service_date)

    year_s = str(year)
    month_s = str(month)
    dow_id_s = str(dow_id)
    week_id_s = str(week_id)
    out: list[tuple[str, int, list[str]]] = []
    for serial in retained:
        rows = groups[serial]
        ranks = sequence_ranks([r[1] for r in rows])
        pseudo = pseudonymize(serial, service_date, key)
        for fields, rank in zip(rows, ranks):
            out.append(
                (
                    pseudo,
                    rank,
                    [
                        pseudo,
                        str(rank),
                        str(int(fields[3])),
                        fields[4],
                        str(int(fields[5])) if fields[5] else "",
                        fields[6],
                        format_money(parse_money(fields[11])),
                        str(int(fields[12])),
                        fields[13],
                        truncate_hms(fields[1][11:], granularity),
                        str(int(fields[7])),
                        fields[8],
                        truncate_hms(fields[2][11:], granularity) if fields[2] else "",
                        str(int(fields[9])) if fields[9] else "",
                        fields[10],
                        year_s,
                        month_s,
                        dow_id_s,
                        dow_name,
                        week_id_s,
                    ],
                )
            )
    out.sort(key=lambda item: (item[0], item[1]))

    with open(part_path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        for _, _, row in out:
            writer.writerow(row)
    return service_iso, row_total, len(groups), len(retained), len(out)


def anonymize(
    input_path: str | Path,
    output_dir: str | Path,
    config: AnonymizationConfig,
    *,
    threads: int = 1,
    skip_invalid: bool = False,
    force: bool = False,
) -> RunResult:
    """Run the full anonymization pipeline over one raw CSV.

    Deterministic: one (input, config, key, seed) tuple yields byte-identical
    month files and manifest at any `threads` setting. Existing outputs are
    never overwritten unless `force` is set.
    """
    input_path = Path(input_path)
    output_dir = Path(output_dir)
    digest = config_digest(config)
    logger.info("anonymize starting: config digest %s", digest)

    manifest_path = output_dir / PRIVATE_DIR / MANIFEST_NAME
    if manifest_path.exists() and not force:
        raise OutputCollisionError(f"{manifest_path} exists; pass force to overwrite")
    if not input_path.exists():
        raise FareanonError(f"raw input not found: {input_path}")

    boundary = config.circadian_boundary.strftime("%H:%M:%S")
    plans: dict[str, MonthPlan] = {}
    retained_iso: dict[str, set[str]] = {}
    months_seen: set[str] = set()
    prev_day: dict[str, str] = {}

    input_rows = 0
    skipped_rows = 0
    dropped_date_rows = 0

    with tempfile.TemporaryDirectory(prefix="fareanon-spill-") as spill_dir:
        spill_root = Path(spill_dir)
        writers: dict[str, csv.writer] = {}
        handles = []
        try:
            with open(input_path, "r", encoding="utf-8", newline="") as source:
                reader = csv.reader(source)
                check_raw_header(next(reader, None), input_path)
                for number, fields in enumerate(reader, start=1):
                    violations = validate_raw_fields(fields)
                    if violations:
                        if skip_invalid:
                            skipped_rows += 1
                            continue
                        raise DataValidationError(number, violations)
                    input_rows += 1

                    tag_on = fields[1]
                    civil = tag_on[:10]
                    if tag_on[11:] >= boundary:
                        service = civil
                    else:
                        service = prev_day.get(civil)
                        if service is None:
                            service = (date.fromisoformat(civil) - timedelta(days=1)).isoformat()
                            prev_day[civil] = service
                    ym = service[:7]

                    retained = retained_iso.get(ym)
                    if retained is None:
                        plan = build_month_plan(int(ym[:4]), int(ym[5:]), config)
                        plans[ym] = plan
                        retained = {d.isoformat() for d in plan.retained_dates}
                        retained_iso[ym] = retained
                    months_seen.add(ym)

                    if service not in retained:
                        dropped_date_rows += 1
                        continue
                    writer = writers.get(service)
                    if writer is None:
                        handle = open(
                            spill_root / f"{service}.csv", "w", encoding="utf-8", newline=""
                        )
                        handles.append(handle)
                        writer = csv.writer(handle)
                        writers[service] = writer
                    writer.writerow(fields)
        finally:
            for handle in handles:
                handle.close()

        # All target paths are known now; refuse collisions before any work
        # is written.
        targets: dict[str, Path] = {
            ym: output_dir / month_file_name(int(ym[:4]), int(ym[5:])) for ym in sorted(months_seen)
        }
        if not force:
            existing = [str(p) for p in targets.values() if p.exists()]
            if existing:
                raise OutputCollisionError(
                    f"output files exist: {', '.join(existing)}; pass force to overwrite"
                )

        jobs = []
        for service in sorted(writers):
            ym = service[:7]
            plan = plans[ym]
            jobs.append(
                (
                    str(spill_root / f"{service}.csv"),
                    str(spill_root / f"{service}.part"),
                    service,
                    config.secret_key,
                    config.run_seed,
                    config.card_sample_rate,
                    config.time_granularity_minutes,
                    plan.date_id_map[date.fromisoformat(service)],
                    plan.year,
                    plan.month,
                )
            )

        stats: dict[str, DateStats] = {}
        if threads > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(_process_date, jobs))
        else:
            results = [_process_date(job) for job in jobs]
        for service, rows, active, kept, out_rows in results:
            stats[service] = DateStats(service, rows, active, kept, out_rows)

        output_dir.mkdir(parents=True, exist_ok=True)
        months: list[MonthOutput] = []
        for ym in sorted(months_seen):
            plan = plans[ym]
            target = targets[ym]
            # Dates merge in RandomWeekID order; rows inside a part are
            # already (ClipperCardID, TripSequenceID)-sorted.
            by_week_id = sorted(
                (week_id, d.isoformat())
                for d, week_id in plan.date_id_map.items()
                if d.isoformat() in writers
            )
            month_rows = 0
            with atomic_write(target) as handle:
                writer = csv.writer(handle)
                writer.writerow(OUTPUT_COLUMNS)
                for _, service in by_week_id:
                    part = spill_root / f"{service}.part"
                    with open(part, "r", encoding="utf-8", newline="") as part_handle:
                        shutil.copyfileobj(part_handle, handle)
                    month_rows += stats[service].output_rows
            months.append(
                MonthOutput(
                    year=plan.year,
                    month=plan.month,
                    path=target,
                    digest=sha256_file(target),
                    row_count=month_rows,
                )
            )

    retained_input = sum(s.input_rows for s in stats.values())
    output_rows = sum(s.output_rows for s in stats.values())
    dropped_card_rows = retained_input - output_rows

    manifest = {
        "format_version": MANIFEST_VERSION,
        "config": public_config_dict(config),
        "config_digest": digest,
        "input": {
            "file": input_path.name,
            "rows": input_rows,
            "skipped_invalid_rows": skipped_rows,
        },
        "totals": {
            "dropped_unretained_date_rows": dropped_date_rows,
            "dropped_unretained_card_rows": dropped_card_rows,
            "output_rows": output_rows,
        },
        "months": {
            ym: {
                "output_file": targets[ym].name,
                "digest": next(m.digest for m in months if targets[ym] == m.path),
                "output_rows": next(m.row_count for m in months if targets[ym] == m.path),
                "retained_dates": sorted(d.isoformat() for d in plans[ym].retained_dates),
                "date_id_map": {
                    d.isoformat(): week_id for d, week_id in sorted(plans[ym].date_id_map.items())
                },
                "seeds": dict(plans[ym].seeds),
                "dates": {
                    s.service_date: {
                        "input_rows": s.input_rows,
                        "active_cards": s.active_cards,
                        "retained_cards": s.retained_cards,
                        "output_rows": s.output_rows,
                    }
                    for s in stats.values()
                    if s.service_date[:7] == ym
                },
            }
            for ym in sorted(months_seen)
        },
    }
    with atomic_write(manifest_path) as handle:
        json.dump(manifest, handle, sort_keys=True, indent=2)
        handle.write("\n")

    logger.info(
        "anonymize finished: %d input rows -> %d output rows across %d month(s)",
        input_rows,
        output_rows,
        len(months),
    )
    return RunResult(
        months=months,
        manifest_path=manifest_path,
        config_digest=digest,
        input_rows=input_rows,
        skipped_rows=skipped_rows,
        dropped_date_rows=dropped_date_rows,
        dropped_card_rows=dropped_card_rows,
        output_rows=output_rows,
    )
