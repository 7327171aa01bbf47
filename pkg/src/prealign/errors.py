"""Exception types shared across the package."""


class PrealignError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(PrealignError):
    """Array shapes or dimensions are inconsistent with the operation."""


class ConfigError(PrealignError):
    """A configuration value is invalid or out of its allowed range."""


class DataError(PrealignError):
    """Data content is inconsistent (label out of range, count mismatch)."""


class FormatError(PrealignError):
    """A file could not be parsed (bad magic, malformed record or line)."""


class NumericError(PrealignError):
    """A non-finite value (NaN/Inf) appeared where finiteness is required."""
