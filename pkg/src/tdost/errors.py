"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: ConfigError -> 2, DataError -> 3,
ServiceError -> 4. Plain ValueError/TypeError mark programming errors
(contract violations) and are never converted to exit codes.
"""

from __future__ import annotations


class TdostError(Exception):
    """Base class for all package errors."""


class ConfigError(TdostError):
    """Invalid configuration: bad field values, missing paths, bad flags."""


class DataError(TdostError):
    """Malformed input data: logs, layouts, maps, caches, datasets."""


class ParseError(DataError):
    """A raw log line that does not match the event grammar."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class LayoutError(DataError):
    """A home layout document that fails schema or content validation."""


class UnresolvedSensorError(DataError):
    """An event references a sensor id absent from the home layout."""


class UnmappedLabelError(DataError):
    """A raw activity label absent from the home's activity map."""


class SegmentationError(DataError):
    """Ill-formed annotation structure: interleaved or dangling markers."""


class AugmentationError(DataError):
    """Problems in the LLM augmentation path (cache or response format)."""


class CacheMissError(AugmentationError):
    """Offline mode hit a trigger key with no cache entry."""


class ResponseFormatError(AugmentationError):
    """LLM response that cannot be parsed into the required shape."""


class ServiceError(TdostError):
    """External service failure: HTTP errors, timeouts, retry exhaustion."""
