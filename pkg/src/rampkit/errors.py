"""Exception hierarchy shared by all rampkit modules."""

from __future__ import annotations


class RampkitError(Exception):
    """Base class for every error raised by this package."""


class DataError(RampkitError):
    """Malformed or contract-violating input data."""


class ConfigError(RampkitError):
    """Invalid configuration or parameter value."""


# -- CSV / table ingestion ---------------------------------------------------

class MissingColumnError(DataError):
    """A required column is absent from the CSV header."""


class NonUniformStepError(DataError):
    """Timestamps are not strictly increasing with a constant step."""


class NonFiniteValueError(DataError):
    """A numeric cell parsed to NaN or infinity."""


class AlignmentError(DataError):
    """Series or tables do not share a common clock."""


# -- generic numeric contracts -----------------------------------------------

class TooShortError(DataError):
    """Input series is shorter than the operation requires."""


class EmptyInputError(DataError):
    """An input sequence is empty."""


class LengthMismatchError(DataError):
    """Paired sequences have different lengths."""


class OutOfRangeError(DataError):
    """A value lies outside its documented interval."""


# -- decomposition / screening -----------------------------------------------

class EmptySelectionError(ConfigError):
    """A mode-index selection is empty."""


class ZeroBaselineError(DataError):
    """Pole-rate baseline count is zero."""


class AllModesRejectedError(DataError):
    """Pole-rate screening rejected every decomposed mode."""


# -- matching ------------------------------------------------------------------

class HistoricalTooShortError(DataError):
    """Historical series is shorter than a segment to be matched."""


# -- attention -----------------------------------------------------------------

class InvalidSError(ConfigError):
    """Requested number of dominant queries is out of range."""


# -- forecasting -----------------------------------------------------------------

class SingularSystemError(DataError):
    """Normal equations are rank-deficient with no ridge penalty."""


class InvalidConfigError(ConfigError):
    """Scenario or run configuration fails validation."""
