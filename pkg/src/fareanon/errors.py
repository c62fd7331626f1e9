"""Exception types shared across the package."""


class FareanonError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(FareanonError):
    """Invalid configuration value or unusable config file."""


class KeyMaterialError(ConfigError):
    """Missing, empty, or malformed secret key material."""


class DataValidationError(FareanonError):
    """Raw input failed validation; carries the 1-based data row number."""

    def __init__(self, row_number: int, violations: list[str]):
        self.row_number = row_number
        self.violations = violations
        super().__init__(f"row {row_number}: " + "; ".join(violations))


class OutputCollisionError(FareanonError):
    """Refusing to overwrite an existing output file without --force."""


class AuditMismatchError(FareanonError):
    """Ground truth does not correspond to the release being audited."""
