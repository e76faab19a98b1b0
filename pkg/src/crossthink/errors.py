"""Exception hierarchy shared across the toolkit.

Exit-code mapping used by the CLI: ConfigurationError -> 2, BackendError -> 3,
incomplete inputs -> 1. Everything else is a bug.
"""

from __future__ import annotations


class CrossthinkError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(CrossthinkError):
    """Invalid config, missing asset strings, malformed requests."""


class BackendError(CrossthinkError):
    """Base class for inference-backend failures."""

    def __init__(self, message: str, partial_count: int = 0):
        super().__init__(message)
        self.partial_count = partial_count


class TransportError(BackendError):
    """Connection-level failure. Retryable."""


class ProtocolError(BackendError):
    """Backend replied with a payload we cannot interpret. Never retried."""


class GenerationTimeout(BackendError):
    """Request exceeded its deadline; carries the partial token count."""


class ScriptMissError(BackendError):
    """Mock backend received a request no script entry matches (test aid)."""


class DatasetError(CrossthinkError):
    """Benchmark file failed to load or validate."""


class ExtractionFailure(CrossthinkError):
    """No answer could be extracted from a generation. Scored as incorrect."""


class UndeterminedLanguageError(CrossthinkError):
    """Text contains no language-classifiable tokens (e.g. math only)."""


class UndefinedComplianceError(CrossthinkError):
    """Compliance requested over text with zero classifiable word tokens."""


class AnalysisError(CrossthinkError):
    """Aggregate math called outside its domain (zero variance, N <= 0, ...)."""
