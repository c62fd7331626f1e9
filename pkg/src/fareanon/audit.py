"""Privacy audit over a finished anonymization run.

Four measurements, all computed from the released files plus the private
run materials (raw feed, key, manifest):

* empirical per-day inclusion probability, re-driving the run's own
  selection routines in a Monte Carlo loop and comparing against the
  closed-form value;
* trajectory uniqueness within each published day, as a k-anonymity
  histogram over card-days;
* a concrete linkage adversary that tries to re-join pseudonyms across
  consecutive published days, scored against ground truth recovered by
  re-deriving pseudonyms with the key, and compared to the same attack on a
  counterfactual release with sampling disabled;
* rank correlation between published day IDs and true calendar order, which
  should sit near zero if date obfuscation is doing its job.
"""

from __future__ import annotations

import csv
import json
import random
import tempfile
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path

from .config import AnonymizationConfig, config_digest
from .errors import AuditMismatchError, FareanonError
from .pipeline import MANIFEST_NAME, PRIVATE_DIR, anonymize
from .pseudonym import pseudonymize
from .rawio import check_raw_header
from .records import OUTPUT_COLUMNS, day_name, validate_raw_fields
from .sampling import (
    _choose_dates,
    _shuffle_take,
    inclusion_probability,
    month_weekday_dates,
    round_half_up,
)
from .seeds import LABEL_MONTE_CARLO, derive_seed

_HISTOGRAM_BUCKETS = ("1", "2", "3", "4-5", "6-9", "10+")


def _bucket(k: int) -> str:
    if k <= 3:
        return str(k)
    if k <= 5:
        return "4-5"
    if k <= 9:
        return "6-9"
    return "10+"


def spearman_rho(xs: list[int], ys: list[int]) -> float:
    """Rank correlation for sequences of distinct values (no tie handling)."""
    n = len(xs)
    if n != len(ys):
        raise ValueError("sequences differ in length")
    if n < 2:
        return 0.0
    rank_x = {v: i for i, v in enumerate(sorted(xs))}
    rank_y = {v: i for i, v in enumerate(sorted(ys))}
    d2 = sum((rank_x[x] - rank_y[y]) ** 2 for x, y in zip(xs, ys))
    return 1.0 - 6.0 * d2 / (n * (n * n - 1))


@dataclass(frozen=True)
class InclusionCheck:
    weekday_id: int
    occurrences: int
    keep_count: int
    card_sample_rate: float
    analytic: float
    empirical: float
    trials: int

    @property
    def gap(self) -> float:
        return abs(self.analytic - self.empirical)


def monte_carlo_inclusion(
    year: int,
    month: int,
    config: AnonymizationConfig,
    *,
    trials: int = 20_000,
    population: int = 10,
) -> list[InclusionCheck]:
    """Observed inclusion frequency for one card on one date, per weekday.

    Each trial replays the run's actual date-subset and card-shuffle
    routines under a fresh draw, so this checks the implementation, not
    just the formula. The synthetic population size is chosen so the
    card-stage keep fraction is exact.
    """
    groups = month_weekday_dates(year, month)
    cards = [f"card{i:02d}" for i in range(population)]
    keep_cards = round_half_up(config.card_sample_rate * population)
    checks = []
    for weekday_id in range(1, 8):
        dates = groups[weekday_id]
        occurrences = len(dates)
        keep = (
            config.weekday_keep_count
            if config.weekday_keep_count is not None
            else occurrences
        )
        analytic = inclusion_probability(occurrences, keep, config.card_sample_rate)
        rng = random.Random(
            derive_seed(
                config.run_seed,
                LABEL_MONTE_CARLO,
                f"{year:04d}-{month:02d}-{weekday_id}",
            )
        )
        target_date = dates[0]
        target_card = cards[0]
        hits = 0
        for _ in range(trials):
            if target_date not in _choose_dates(dates, keep, rng):
                continue
            if target_card in _shuffle_take(cards, keep_cards, rng):
                hits += 1
        checks.append(
            InclusionCheck(
                weekday_id=weekday_id,
                occurrences=occurrences,
                keep_count=keep,
                card_sample_rate=config.card_sample_rate,
                analytic=analytic,
                empirical=hits / trials,
                trials=trials,
            )
        )
    return checks


@dataclass(frozen=True)
class UniquenessReport:
    card_days: int
    unique_card_days: int
    histogram: dict[str, int]

    @property
    def unique_fraction(self) -> float:
        return self.unique_card_days / self.card_days if self.card_days else 0.0


@dataclass(frozen=True)
class LinkageResult:
    day_pairs: int
    attempts: int
    correct: int
    linkable: int
    chance: float

    @property
    def recovery_rate(self) -> float:
        return self.correct / self.attempts if self.attempts else 0.0


def _read_month_days(path: Path) -> dict[int, dict[str, list[tuple]]]:
    """Published month file -> {RandomWeekID: {pseudonym: ordered trip tuples}}.

    A trip tuple is (AgencyID, TagOnLocationId, TagOnTime, TagOffLocationId,
    TagOffTime); ordering follows TripSequenceID.
    """
    days: dict[int, dict[str, list[tuple]]] = defaultdict(dict)
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or tuple(header) != OUTPUT_COLUMNS:
            raise FareanonError(f"{path}: not a published month file")
        col = {name: i for i, name in enumerate(OUTPUT_COLUMNS)}
        c_card, c_seq = col["ClipperCardID"], col["TripSequenceID"]
        c_agency = col["AgencyID"]
        c_on_loc, c_on_time = col["TagOnLocationId"], col["TagOnTime_Time"]
        c_off_loc, c_off_time = col["TagOffLocationId"], col["TagOffTime_Time"]
        c_week = col["RandomWeekID"]
        for row in reader:
            trips = days[int(row[c_week])].setdefault(row[c_card], [])
            trips.append(
                (
                    int(row[c_seq]),
                    row[c_agency],
                    row[c_on_loc],
                    row[c_on_time],
                    row[c_off_loc],
                    row[c_off_time],
                )
            )
    for cards in days.values():
        for pseudo, trips in cards.items():
            trips.sort()
            cards[pseudo] = [trip[1:] for trip in trips]
    return days


def trajectory_uniqueness(path: str | Path) -> UniquenessReport:
    """k-anonymity of full-day trajectories within each published day."""
    days = _read_month_days(Path(path))
    histogram = {bucket: 0 for bucket in _HISTOGRAM_BUCKETS}
    card_days = 0
    unique = 0
    for cards in days.values():
        sizes: dict[tuple, int] = defaultdict(int)
        for trips in cards.values():
            sizes[tuple(trips)] += 1
        for trips in cards.values():
            k = sizes[tuple(trips)]
            histogram[_bucket(k)] += 1
            card_days += 1
            if k == 1:
                unique += 1
    return UniquenessReport(card_days=card_days, unique_card_days=unique, histogram=histogram)


def _location_set(trips: list[tuple]) -> frozenset:
    locations = set()
    for trip in trips:
        locations.add(trip[1])
        if trip[3]:
            locations.add(trip[3])
    return frozenset(locations)


def recover_truth(
    raw_path: str | Path, config: AnonymizationConfig, retained: set[str]
) -> dict[tuple[str, str], str]:
    """(service_date_iso, pseudonym) -> card_serial, re-derived with the key.

    This is the defender's view: with key and raw feed in hand the mapping
    is mechanical. Invalid raw rows are skipped, mirroring a run made with
    skip-invalid.
    """
    boundary = config.circadian_boundary.strftime("%H:%M:%S")
    prev_day: dict[str, str] = {}
    serials_by_date: dict[str, set[str]] = defaultdict(set)
    with open(raw_path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        check_raw_header(next(reader, None), Path(raw_path))
        for fields in reader:
            if validate_raw_fields(fields):
                continue
            tag_on = fields[1]
            civil = tag_on[:10]
            if tag_on[11:] >= boundary:
                service = civil
            else:
                service = prev_day.get(civil)
                if service is None:
                    service = (date.fromisoformat(civil) - timedelta(days=1)).isoformat()
                    prev_day[civil] = service
            if service in retained:
                serials_by_date[service].add(fields[0])
    truth: dict[tuple[str, str], str] = {}
    for service, serials in serials_by_date.items():
        service_date = date.fromisoformat(service)
        for serial in serials:
            truth[(service, pseudonymize(serial, service_date, config.secret_key))] = serial
    return truth


def linkage_attack(
    anon_path: str | Path,
    date_id_map: dict[str, int],
    truth: dict[tuple[str, str], str],
) -> LinkageResult:
    """Re-join pseudonyms across calendar-consecutive published days.

    The adversary sees only the published file plus (worst case) the true
    date behind each day ID. For each pseudonym on the earlier day it
    predicts a partner on the later day: an exact trajectory match when one
    exists, otherwise the candidate sharing the most locations, ties broken
    by smallest pseudonym. Scoring uses the recovered truth mapping.
    """
    days = _read_month_days(Path(anon_path))
    by_date = sorted(date_id_map.items())

    pairs = 0
    attempts = 0
    correct = 0
    linkable = 0
    chance = 0.0
    for (iso1, week1), (iso2, week2) in zip(by_date, by_date[1:]):
        if date.fromisoformat(iso2) - date.fromisoformat(iso1) != timedelta(days=1):
            continue
        day1, day2 = days.get(week1), days.get(week2)
        if not day1 or not day2:
            continue
        pairs += 1
        exact: dict[tuple, list[str]] = defaultdict(list)
        by_location: dict[str, list[str]] = defaultdict(list)
        serials2 = set()
        for pseudo, trips in day2.items():
            exact[tuple(trips)].append(pseudo)
            for location in _location_set(trips):
                by_location[location].append(pseudo)
            key = (iso2, pseudo)
            if key not in truth:
                raise AuditMismatchError(
                    f"pseudonym {pseudo} on day {week2} not reproducible from the raw "
                    "feed with this key; wrong key or mismatched input"
                )
            serials2.add(truth[key])
        fallback = min(day2)
        day2_count = len(day2)

        for pseudo, trips in day1.items():
            key = (iso1, pseudo)
            if key not in truth:
                raise AuditMismatchError(
                    f"pseudonym {pseudo} on day {week1} not reproducible from the raw "
                    "feed with this key; wrong key or mismatched input"
                )
            serial = truth[key]
            hit = exact.get(tuple(trips))
            if hit:
                predicted = min(hit)
            else:
                # Shared-location counting via the inverted index; candidates
                # sharing nothing never beat the zero-overlap fallback.
                scores: Counter = Counter()
                for location in _location_set(trips):
                    scores.update(by_location.get(location, ()))
                if scores:
                    best = max(scores.values())
                    predicted = min(p for p, s in scores.items() if s == best)
                else:
                    predicted = fallback
            attempts += 1
            if truth[(iso2, predicted)] == serial:
                correct += 1
            if serial in serials2:
                linkable += 1
                chance += 1.0 / day2_count

    return LinkageResult(
        day_pairs=pairs,
        attempts=attempts,
        correct=correct,
        linkable=linkable,
        chance=chance / attempts if attempts else 0.0,
    )


@dataclass(frozen=True)
class MonthAudit:
    year: int
    month: int
    uniqueness: UniquenessReport
    inclusion: list[InclusionCheck]
    linkage: LinkageResult
    counterfactual_linkage: LinkageResult | None
    reversal_rho: float
    published_days: int


@dataclass(frozen=True)
class AuditReport:
    config_digest: str
    months: list[MonthAudit] = field(default_factory=list)

    def to_text(self) -> str:
        lines = [f"privacy audit (config digest {self.config_digest})"]
        for m in self.months:
            lines.append(f"month {m.year:04d}-{m.month:02d}:")
            u = m.uniqueness
            lines.append(
                f"  within-day trajectory uniqueness: {u.unique_card_days}/{u.card_days} "
                f"card-days unique ({u.unique_fraction:.1%})"
            )
            buckets = ", ".join(f"k={b}: {u.histogram[b]}" for b in _HISTOGRAM_BUCKETS)
            lines.append(f"  k-anonymity histogram: {buckets}")
            lines.append("  per-day inclusion probability (analytic vs observed):")
            for check in m.inclusion:
                lines.append(
                    f"    {day_name(check.weekday_id):<9} ({check.keep_count} of "
                    f"{check.occurrences} dates): {check.analytic:.4f} vs "
                    f"{check.empirical:.4f} over {check.trials} trials"
                )
            link = m.linkage
            lines.append(
                f"  consecutive-day linkage: {link.correct}/{link.attempts} recovered "
                f"({link.recovery_rate:.1%}) across {link.day_pairs} day pairs; "
                f"random-guess baseline {link.chance:.1%}; "
                f"{link.linkable} truly present next day"
            )
            if m.counterfactual_linkage is not None:
                cf = m.counterfactual_linkage
                lines.append(
                    f"  same attack, sampling disabled: {cf.correct}/{cf.attempts} "
                    f"recovered ({cf.recovery_rate:.1%}) across {cf.day_pairs} day pairs"
                )
            lines.append(
                f"  calendar-order correlation of day IDs: rho={m.reversal_rho:+.3f} "
                f"over {m.published_days} days"
            )
        return "\n".join(lines) + "\n"


def _load_manifest(anon_dir: Path) -> dict:
    manifest_path = anon_dir / PRIVATE_DIR / MANIFEST_NAME
    if not manifest_path.exists():
        raise FareanonError(f"no run manifest at {manifest_path}; run anonymize first")
    with open(manifest_path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def build_audit_report(
    raw_path: str | Path,
    anon_dir: str | Path,
    config: AnonymizationConfig,
    *,
    trials: int = 20_000,
    counterfactual: bool = True,
) -> AuditReport:
    """Audit one finished run end to end.

    The manifest in `anon_dir` names the published months and their private
    date maps. The counterfactual pass re-anonymizes the raw feed with
    sampling disabled into a scratch directory, to show what the linkage
    adversary would get without it.
    """
    anon_dir = Path(anon_dir)
    manifest = _load_manifest(anon_dir)
    digest = config_digest(config)
    if manifest.get("config_digest") != digest:
        raise AuditMismatchError(
            "config digest does not match the manifest; audit needs the exact "
            "config, key, and seed the run used"
        )

    months = manifest["months"]
    retained = {iso for info in months.values() for iso in info["retained_dates"]}
    truth = recover_truth(raw_path, config, retained)

    counter_links: dict[str, LinkageResult] = {}
    if counterfactual:
        with tempfile.TemporaryDirectory(prefix="fareanon-audit-") as tmp:
            cf_config = config.without_sampling()
            cf_run = anonymize(raw_path, tmp, cf_config)
            cf_manifest = _load_manifest(Path(tmp))
            cf_months = cf_manifest["months"]
            cf_retained = {
                iso for info in cf_months.values() for iso in info["retained_dates"]
            }
            cf_truth = recover_truth(raw_path, cf_config, cf_retained)
            for ym, info in cf_months.items():
                counter_links[ym] = linkage_attack(
                    Path(tmp) / info["output_file"],
                    info["date_id_map"],
                    cf_truth,
                )

    audits = []
    for ym in sorted(months):
        info = months[ym]
        year, month = int(ym[:4]), int(ym[5:])
        month_path = anon_dir / info["output_file"]
        date_id_map = info["date_id_map"]
        audits.append(
            MonthAudit(
                year=year,
                month=month,
                uniqueness=trajectory_uniqueness(month_path),
                inclusion=monte_carlo_inclusion(year, month, config, trials=trials),
                linkage=linkage_attack(month_path, date_id_map, truth),
                counterfactual_linkage=counter_links.get(ym),
                reversal_rho=spearman_rho(
                    list(range(len(date_id_map))),
                    [week for _, week in sorted(date_id_map.items())],
                ),
                published_days=len(date_id_map),
            )
        )
    return AuditReport(config_digest=digest, months=audits)
