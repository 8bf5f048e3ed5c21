"""
errors.py — Exception hierarchy shared by every tool.

Each exception carries the process exit code the CLI reports for it:
1 validation/domain error, 2 I/O error, 3 configuration error.
"""


class FSSError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 1


class DataValidationError(FSSError):
    """Input data failed validation. Carries the ValidationReport."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class DomainError(FSSError):
    """An operation was called outside its domain (empty cell, too few values...)."""


class AnalysisError(DomainError):
    """A cited publication has no usable citation baseline."""


class BylineLookupError(DomainError, LookupError):
    """A researcher was looked up on a byline they do not appear on."""


class InputFileError(FSSError):
    """An input file is missing or unreadable."""

    exit_code = 2


class ConfigurationError(FSSError):
    """Bad analysis config, credit weights, salary table or synthetic config."""

    exit_code = 3
