"""Deterministic anonymization of smart-card fare transactions.

Turns a raw transaction feed into monthly public datasets: personal
identifiers separated out, card serials replaced by per-day pseudonyms,
days and cards subsampled, dates obfuscated behind shuffled day IDs, and
times coarsened with per-card trip sequence numbers. A synthetic feed
generator and a privacy audit ship alongside the pipeline.
"""

from .audit import AuditReport, build_audit_report, monte_carlo_inclusion, trajectory_uniqueness
from .config import (
    AnonymizationConfig,
    config_digest,
    key_fingerprint,
    load_config_file,
    read_key_file,
    write_key_file,
)
from .conformance import ConformanceReport, validate_output
from .errors import (
    AuditMismatchError,
    ConfigError,
    DataValidationError,
    FareanonError,
    KeyMaterialError,
    OutputCollisionError,
)
from .pipeline import RunResult, anonymize, month_file_name
from .pseudonym import pseudonymize
from .rawio import read_raw, write_raw
from .records import OUTPUT_COLUMNS, RAW_COLUMNS, AnonymizedRecord, RawTransaction
from .sampling import build_month_plan, inclusion_probability, sample_cards, sample_weekdays
from .synthgen import (
    AgencySpec,
    PopulationSpec,
    default_population,
    generate_files,
    generate_month,
)
from .temporal import circadian_date, truncate_time

__version__ = "1.0.0"

__all__ = [
    "AgencySpec",
    "AnonymizationConfig",
    "AnonymizedRecord",
    "AuditMismatchError",
    "AuditReport",
    "ConfigError",
    "ConformanceReport",
    "DataValidationError",
    "FareanonError",
    "KeyMaterialError",
    "OUTPUT_COLUMNS",
    "OutputCollisionError",
    "PopulationSpec",
    "RAW_COLUMNS",
    "RawTransaction",
    "RunResult",
    "anonymize",
    "build_audit_report",
    "build_month_plan",
    "circadian_date",
    "config_digest",
    "default_population",
    "generate_files",
    "generate_month",
    "inclusion_probability",
    "key_fingerprint",
    "load_config_file",
    "month_file_name",
    "monte_carlo_inclusion",
    "pseudonymize",
    "read_key_file",
    "read_raw",
    "sample_cards",
    "sample_weekdays",
    "trajectory_uniqueness",
    "truncate_time",
    "validate_output",
    "write_key_file",
    "write_raw",
    "__version__",
]
