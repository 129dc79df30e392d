"""Exception hierarchy shared across the package."""


class StadfError(Exception):
    """Base class for all package-specific errors."""


class InvalidSpecError(StadfError, ValueError):
    """A DGP, volatility, kernel, or experiment specification is invalid."""


class SeriesTooShortError(StadfError, ValueError):
    """The input series does not meet a minimum-length precondition."""


class DegenerateWindowError(StadfError):
    """A single-window statistic is undefined (singular design or zero variance)."""


class DegenerateThresholdError(StadfError):
    """The truncation threshold is zero while residuals are not identically zero."""


class DegenerateProfileError(StadfError):
    """All truncated squared residuals are zero; no variance profile exists."""


class DegenerateStatisticError(StadfError):
    """Every window in a sup-family grid was degenerate; the supremum is undefined."""


class CsvParseError(StadfError, ValueError):
    """A CSV input could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class ConfigError(StadfError, ValueError):
    """An experiment or run configuration is malformed (e.g. unknown keys)."""
