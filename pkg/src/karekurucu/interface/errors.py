"""Interface-level errors with stable code strings and HTTP status mapping."""
from __future__ import annotations


class AppError(Exception):
    code = "AppError"
    http_status = 500

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "details": self.details}


class ValidationFailed(AppError):
    code = "ValidationFailed"
    http_status = 400


class SessionNotFound(AppError):
    code = "SessionNotFound"
    http_status = 404


class Conflict(AppError):
    code = "Conflict"
    http_status = 409


class UnknownCandidate(AppError):
    code = "UnknownCandidate"
    http_status = 422


class AllProvidersFailed(AppError):
    code = "AllProvidersFailed"
    http_status = 502


class NoWordFitsError(AppError):
    code = "NoWordFits"
    http_status = 422


class GenerationFailed(AppError):
    code = "GenerationFailed"
    http_status = 422
