"""Error taxonomy shared by all confcube modules.

Every error carries a stable machine-readable ``code`` so that the CLI and
the HTTP service can report failures uniformly. The code is a class
attribute; the human-readable message lives in ``str(exc)``.
"""

from __future__ import annotations


class ConfcubeError(Exception):
    """Base class for all domain errors."""

    code: str = "ERROR"


# --- core model ---------------------------------------------------------


class IndexOutOfAlphabet(ConfcubeError):
    code = "INDEX_OUT_OF_ALPHABET"


class LengthMismatch(ConfcubeError):
    code = "LENGTH_MISMATCH"


class EmptyInput(ConfcubeError):
    code = "EMPTY_INPUT"


# --- ingestion ----------------------------------------------------------


class MalformedDocument(ConfcubeError):
    code = "MALFORMED_DOCUMENT"


class SchemaViolation(ConfcubeError):
    code = "SCHEMA_VIOLATION"


class InvariantViolation(ConfcubeError):
    code = "INVARIANT_VIOLATION"


class AggregatedShapeMismatch(ConfcubeError):
    code = "AGGREGATED_SHAPE_MISMATCH"


class AlphabetMismatch(ConfcubeError):
    code = "ALPHABET_MISMATCH"


class DuplicateRunId(ConfcubeError):
    code = "DUPLICATE_RUN_ID"


# --- metrics ------------------------------------------------------------


class EmptyEpoch(ConfcubeError):
    code = "EMPTY_EPOCH"


class UnknownClass(ConfcubeError):
    code = "UNKNOWN_CLASS"


class UnknownIteration(ConfcubeError):
    code = "UNKNOWN_ITERATION"


class BadGamma(ConfcubeError):
    code = "BAD_GAMMA"


class ScaleDomainError(ConfcubeError):
    """A value handed to the display-scale transform lies outside [0, vmax]."""

    code = "SCALE_DOMAIN"


# --- lens ---------------------------------------------------------------


class TooFewClasses(ConfcubeError):
    code = "TOO_FEW_CLASSES"


class InvalidMapping(ConfcubeError):
    code = "INVALID_MAPPING"


class EmptySlice(ConfcubeError):
    code = "EMPTY_SLICE"


class InvalidRange(ConfcubeError):
    code = "INVALID_RANGE"


class InvalidFocus(ConfcubeError):
    code = "INVALID_FOCUS"


# --- service ------------------------------------------------------------


class UnknownRun(ConfcubeError):
    code = "UNKNOWN_RUN"


class UnknownMetric(ConfcubeError):
    code = "UNKNOWN_METRIC"


class BadParameter(ConfcubeError):
    code = "BAD_PARAMETER"
