"""Exception hierarchy shared across the toolkit.

Each error subclasses the builtin a caller would naturally catch for the same
condition, so ``except ValueError`` keeps working for schema problems and
``except LookupError`` for missing keys.
"""
from __future__ import annotations

from typing import Optional


class CorpusFormatError(ValueError):
    """A JSON Lines record could not be parsed or failed validation."""

    def __init__(self, message: str, *, line_number: Optional[int] = None) -> None:
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class DuplicateDocumentError(CorpusFormatError):
    pass


class DuplicateSummaryError(CorpusFormatError):
    pass


class UnknownEntityError(LookupError):
    pass


class MissingSummaryError(LookupError):
    pass


class UnknownDocumentError(LookupError):
    pass


class DimensionMismatchError(ValueError):
    pass


class EmptyDocumentSetError(ValueError):
    pass


class PromptSpecError(ValueError):
    pass


class EndpointError(RuntimeError):
    pass


class TransientEndpointError(EndpointError):
    """Retryable failure: timeouts, connection resets, 429 and 5xx responses."""


class ProtocolEndpointError(EndpointError):
    """Non-retryable failure: 4xx responses or malformed payloads."""


class RetriesExhaustedError(EndpointError):
    def __init__(self, message: str, *, attempts: int) -> None:
        self.attempts = attempts
        super().__init__(message)


class EmptyCompletionError(EndpointError):
    pass


class CredentialError(EndpointError):
    pass


class NoQAPairsError(ValueError):
    def __init__(self, message: str, *, doc_id: Optional[str] = None) -> None:
        self.doc_id = doc_id
        super().__init__(message)


class FlattenError(ValueError):
    pass


class FlattenedParseError(ValueError):
    def __init__(self, message: str, *, position: int) -> None:
        self.position = position
        super().__init__(f"{message} (at position {position})")


class BucketEdgesError(ValueError):
    pass


class LengthMismatchError(ValueError):
    pass


class DegenerateVarianceError(ValueError):
    pass


class ConfigError(ValueError):
    pass


class DatasetMismatchError(ValueError):
    pass


class MissingArtifactError(FileNotFoundError):
    pass


__all__ = [
    "CorpusFormatError",
    "DuplicateDocumentError",
    "DuplicateSummaryError",
    "UnknownEntityError",
    "MissingSummaryError",
    "UnknownDocumentError",
    "DimensionMismatchError",
    "EmptyDocumentSetError",
    "PromptSpecError",
    "EndpointError",
    "TransientEndpointError",
    "ProtocolEndpointError",
    "RetriesExhaustedError",
    "EmptyCompletionError",
    "CredentialError",
    "NoQAPairsError",
    "FlattenError",
    "FlattenedParseError",
    "BucketEdgesError",
    "LengthMismatchError",
    "DegenerateVarianceError",
    "ConfigError",
    "DatasetMismatchError",
    "MissingArtifactError",
]
