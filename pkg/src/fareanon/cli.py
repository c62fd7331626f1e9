"""Command line front end.

Subcommands: generate (synthetic raw feed), anonymize (raw feed to monthly
datasets), audit (privacy measurements over a finished run), validate
(conformance check of a published file). Batch only; every run is fully
determined by its inputs, config, key, and seed.

Exit codes: 0 success, 2 usage or bad config value, 3 missing input file,
4 key material problem, 5 data validation failure, 6 output collision,
1 unexpected error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .audit import build_audit_report
from .config import (
    AnonymizationConfig,
    load_config_file,
    parse_boundary,
    read_key_file,
    write_key_file,
)
from .conformance import validate_output
from .errors import (
    AuditMismatchError,
    ConfigError,
    DataValidationError,
    FareanonError,
    KeyMaterialError,
    OutputCollisionError,
)
from .pipeline import anonymize
from .synthgen import default_population, generate_files

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_MISSING_FILE = 3
EXIT_KEY = 4
EXIT_DATA = 5
EXIT_COLLISION = 6

log = logging.getLogger("fareanon")

_CONFIG_FILE_KEYS = (
    "run_seed",
    "card_sample_rate",
    "weekday_keep_count",
    "time_granularity_minutes",
    "circadian_boundary",
)


def _assemble_config(
    config_path: str | None,
    key_file: str | None,
    seed: int | None,
    generate_key: bool = False,
) -> AnonymizationConfig:
    """Defaults, then config file values, then CLI overrides; key always
    from its own file so it never sits next to published parameters."""
    values: dict = {}
    if config_path:
        loaded = load_config_file(config_path)
        unknown = sorted(set(loaded) - set(_CONFIG_FILE_KEYS))
        if unknown:
            raise ConfigError(
                f"unknown config keys: {', '.join(unknown)} "
                f"(known: {', '.join(_CONFIG_FILE_KEYS)})"
            )
        values.update(loaded)
    if "circadian_boundary" in values:
        values["circadian_boundary"] = parse_boundary(str(values["circadian_boundary"]))
    if values.get("weekday_keep_count") is not None:
        values["weekday_keep_count"] = int(values["weekday_keep_count"])
    if "run_seed" in values:
        values["run_seed"] = int(values["run_seed"])
    if "card_sample_rate" in values:
        values["card_sample_rate"] = float(values["card_sample_rate"])
    if "time_granularity_minutes" in values:
        values["time_granularity_minutes"] = int(values["time_granularity_minutes"])
    if seed is not None:
        values["run_seed"] = seed

    if not key_file:
        raise KeyMaterialError("a key file is required; pass --key-file")
    if generate_key:
        write_key_file(key_file)
        log.info("generated new key file %s", key_file)
    return AnonymizationConfig(secret_key=read_key_file(key_file), **values)


def _missing(path: str | Path, what: str) -> bool:
    if Path(path).exists():
        return False
    log.error("%s not found: %s", what, path)
    return True


def _cmd_generate(args: argparse.Namespace) -> int:
    spec = default_population().scaled(args.scale)
    csv_path, truth_path, rows = generate_files(
        spec, args.year, args.month, args.seed, args.output_dir
    )
    log.info(
        "generated %d rows for %04d-%02d (%d cards) -> %s",
        rows, args.year, args.month, spec.cards, csv_path,
    )
    log.info("ground truth -> %s", truth_path)
    return EXIT_OK


def _cmd_anonymize(args: argparse.Namespace) -> int:
    if _missing(args.input, "raw input"):
        return EXIT_MISSING_FILE
    if args.config and _missing(args.config, "config file"):
        return EXIT_MISSING_FILE
    config = _assemble_config(args.config, args.key_file, args.seed, args.generate_key)
    threads = args.threads if args.threads else (os.cpu_count() or 1)
    result = anonymize(
        args.input,
        args.output_dir,
        config,
        threads=threads,
        skip_invalid=args.skip_invalid,
        force=args.force,
    )
    for month in result.months:
        log.info("wrote %s (%d rows, sha256 %s)", month.path, month.row_count, month.digest)
    log.info(
        "done: %d raw rows in, %d rows published, %d skipped invalid; manifest %s",
        result.input_rows, result.output_rows, result.skipped_rows, result.manifest_path,
    )
    log.info("run config digest %s", result.config_digest)
    return EXIT_OK


def _cmd_audit(args: argparse.Namespace) -> int:
    if _missing(args.input, "raw input"):
        return EXIT_MISSING_FILE
    if args.config and _missing(args.config, "config file"):
        return EXIT_MISSING_FILE
    manifest = Path(args.output_dir) / "private" / "manifest.json"
    if _missing(manifest, "run manifest"):
        return EXIT_MISSING_FILE
    config = _assemble_config(args.config, args.key_file, args.seed)
    report = build_audit_report(
        args.input,
        args.output_dir,
        config,
        trials=args.trials,
        counterfactual=not args.no_counterfactual,
    )
    text = report.to_text()
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
        log.info("audit report -> %s", args.report)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    if _missing(args.input, "published file"):
        return EXIT_MISSING_FILE
    granularity = args.granularity
    if args.config:
        if _missing(args.config, "config file"):
            return EXIT_MISSING_FILE
        loaded = load_config_file(args.config)
        granularity = int(loaded.get("time_granularity_minutes", granularity))
    report = validate_output(args.input, granularity_minutes=granularity)
    sys.stdout.write(report.summary() + "\n")
    return EXIT_OK if report.ok else EXIT_DATA


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fareanon",
        description="Anonymize smart-card fare transactions into monthly datasets.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic raw month plus ground truth")
    gen.add_argument("--output-dir", required=True, help="directory for the synthetic files")
    gen.add_argument("--seed", type=int, default=0, help="generator seed (default 0)")
    gen.add_argument("--scale", type=float, default=1.0,
                     help="card-count multiplier over the default population")
    gen.add_argument("--year", type=int, default=2023)
    gen.add_argument("--month", type=int, default=3, choices=range(1, 13))
    gen.set_defaults(func=_cmd_generate)

    anon = sub.add_parser("anonymize", help="raw feed in, monthly datasets out")
    anon.add_argument("--input", required=True, help="raw transaction CSV")
    anon.add_argument("--output-dir", required=True, help="directory for anon_YYYY_MM.csv files")
    anon.add_argument("--config", help="JSON config file")
    anon.add_argument("--key-file", required=True, help="32-byte secret key file")
    anon.add_argument("--generate-key", action="store_true",
                      help="create the key file first (refuses to overwrite)")
    anon.add_argument("--seed", type=int, help="run seed (overrides the config file)")
    anon.add_argument("--threads", type=int,
                      help="worker processes (default: CPU count); output is identical at any setting")
    anon.add_argument("--skip-invalid", action="store_true",
                      help="count and drop invalid raw rows instead of stopping")
    anon.add_argument("--force", action="store_true", help="overwrite existing outputs")
    anon.set_defaults(func=_cmd_anonymize)

    audit = sub.add_parser("audit", help="privacy measurements over a finished run")
    audit.add_argument("--input", required=True, help="the raw CSV the run consumed")
    audit.add_argument("--output-dir", required=True, help="directory the run wrote")
    audit.add_argument("--config", help="JSON config file (must match the run)")
    audit.add_argument("--key-file", required=True, help="the run's key file")
    audit.add_argument("--seed", type=int, help="run seed (overrides the config file)")
    audit.add_argument("--trials", type=int, default=5000,
                       help="Monte Carlo trials per weekday (default 5000)")
    audit.add_argument("--no-counterfactual", action="store_true",
                       help="skip the sampling-disabled comparison run")
    audit.add_argument("--report", help="write the report here instead of stdout")
    audit.set_defaults(func=_cmd_audit)

    val = sub.add_parser("validate", help="conformance-check a published month file")
    val.add_argument("--input", required=True, help="anon_YYYY_MM.csv to check")
    val.add_argument("--granularity", type=int, default=10,
                     help="expected time granularity in minutes (default 10)")
    val.add_argument("--config", help="JSON config file to take the granularity from")
    val.set_defaults(func=_cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KeyMaterialError as exc:
        log.error("key material: %s", exc)
        return EXIT_KEY
    except AuditMismatchError as exc:
        log.error("audit mismatch: %s", exc)
        return EXIT_KEY
    except DataValidationError as exc:
        log.error("invalid raw data: %s", exc)
        return EXIT_DATA
    except OutputCollisionError as exc:
        log.error("%s", exc)
        return EXIT_COLLISION
    except ConfigError as exc:
        log.error("bad configuration: %s", exc)
        return EXIT_USAGE
    except FareanonError as exc:
        log.error("%s", exc)
        return EXIT_DATA
    except Exception:
        log.exception("unexpected failure")
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
