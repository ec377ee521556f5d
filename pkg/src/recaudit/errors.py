"""Exception hierarchy shared across the toolkit.

Every domain error raised by this package derives from RecauditError so the
CLI can map them to a single exit code.
"""

from __future__ import annotations


class RecauditError(Exception):
    """Base class for all domain errors raised by this package."""


class ParseError(RecauditError):
    """A persisted file could not be parsed; carries the offending line number."""

    def __init__(self, path: str, line_no: int, reason: str):
        self.path = path
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"{path}:{line_no}: {reason}")


class DuplicateKeyError(RecauditError):
    """Two records share a key that must be unique."""


class InsufficientDataError(RecauditError):
    """An operation was given fewer inputs than its contract requires."""


class ProtocolError(RecauditError):
    """An annotation-protocol rule was violated (wrong counts, duplicate judge)."""


class UnresolvableError(RecauditError):
    """No qualified judgments exist for a video; its label cannot be resolved."""


class ConfigError(RecauditError):
    """A configuration value violates its contract; message lists violations."""


class DimensionError(RecauditError):
    """A tensor or vector has the wrong shape; names the offending input."""


class DegenerateTableError(RecauditError):
    """A contingency table has a zero marginal row or column."""


class ZeroCellError(RecauditError):
    """A 2x2 effect-size cell is zero.

    Rerun with the Haldane-Anscombe option (0.5 added to every cell) if a
    continuity-corrected estimate is acceptable; the result is then flagged.
    """


class NotFoundError(RecauditError):
    """A video id or keyword is unknown to the platform."""


class QuotaExceededError(RecauditError):
    """The platform refused the request because the API quota is exhausted."""


class TransientError(RecauditError):
    """A retryable platform failure (HTTP 5xx or connection problem)."""


class CapabilityError(RecauditError):
    """The platform client does not support the requested optional capability."""


class CrawlError(RecauditError):
    """The crawl could not make progress (for example, every keyword failed)."""


class CorruptCheckpointError(RecauditError):
    """A crawl checkpoint is damaged; message includes recovery instructions."""
