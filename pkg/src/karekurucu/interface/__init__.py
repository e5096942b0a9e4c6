"""CLI and HTTP service exposing the crossword pipeline."""

from .errors import (
    AllProvidersFailed,
    AppError,
    Conflict,
    SessionNotFound,
    UnknownCandidate,
    ValidationFailed,
)
from .sessions import Session, SessionStore, canonical_json

__all__ = [
    "AllProvidersFailed",
    "AppError",
    "Conflict",
    "Session",
    "SessionNotFound",
    "SessionStore",
    "UnknownCandidate",
    "ValidationFailed",
    "canonical_json",
]
