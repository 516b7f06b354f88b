"""Structural validation of models."""

from .rules import ERROR, WARNING, Diagnostic, error_codes, errors_only, validate

__all__ = ["Diagnostic", "ERROR", "WARNING", "error_codes", "errors_only", "validate"]
