"""Custom exception classes and error handling utilities.

This module provides the error handling system shared by every component:
- Custom exception hierarchy with stable error codes
- Mapping from error families to CLI exit codes
- Consistent error logging
"""

import logging
from enum import Enum, IntEnum
from typing import Any

logger = logging.getLogger(__name__)


class ExitCode(IntEnum):
    """Process exit codes used by every CLI command."""

    OK = 0
    USAGE = 1
    DATA = 2
    NUMERIC = 3


class ErrorCode(str, Enum):
    """Standard error codes for consistent error handling."""

    # Configuration & arguments
    CONFIG_UNKNOWN_KEY = "CONFIG_UNKNOWN_KEY"
    CONFIG_INVALID_VALUE = "CONFIG_INVALID_VALUE"
    ARGUMENT_INVALID = "ARGUMENT_INVALID"
    ARGUMENT_SHAPE_MISMATCH = "ARGUMENT_SHAPE_MISMATCH"

    # Data & files
    EVENTS_INVALID_FORMAT = "EVENTS_INVALID_FORMAT"
    EVENTS_INVALID_CONTENT = "EVENTS_INVALID_CONTENT"
    DATASET_NOT_FOUND = "DATASET_NOT_FOUND"
    DATASET_INVALID_LAYOUT = "DATASET_INVALID_LAYOUT"
    DATASET_UNWRITABLE = "DATASET_UNWRITABLE"
    TEACHER_CACHE_MISSING = "TEACHER_CACHE_MISSING"
    TEACHER_CACHE_CORRUPT = "TEACHER_CACHE_CORRUPT"
    CHECKPOINT_INVALID = "CHECKPOINT_INVALID"

    # Numerics
    NUMERIC_NON_FINITE = "NUMERIC_NON_FINITE"


class E2VException(Exception):
    """Base exception class for the reconstruction toolkit.

    Provides structured error handling with error codes, an exit code for
    the command line and optional details for debugging.
    """

    exit_code: ExitCode = ExitCode.DATA

    def __init__(
        self,
        message: str,
        error_code: ErrorCode,
        details: dict[str, Any] | None = None,
    ):
        super().__init__(message)
        self.message = message
        self.error_code = error_code
        self.details = details or {}

    def to_dict(self) -> dict[str, Any]:
        """Convert exception to dictionary for logging and reports."""
        return {
            "error_code": self.error_code.value,
            "message": self.message,
            "exit_code": int(self.exit_code),
            "details": self.details,
        }


class ConfigurationError(E2VException):
    """Unknown keys or invalid values in the run configuration."""

    exit_code = ExitCode.USAGE

    def __init__(
        self,
        message: str = "Invalid configuration",
        error_code: ErrorCode = ErrorCode.CONFIG_INVALID_VALUE,
        details: dict[str, Any] | None = None,
        key: str | None = None,
    ):
        if key:
            details = details or {}
            details["key"] = key
        super().__init__(message=message, error_code=error_code, details=details)


class InvalidArgumentError(E2VException, ValueError):
    """Precondition violated by an argument of a library operation."""

    exit_code = ExitCode.USAGE

    def __init__(
        self,
        message: str = "Invalid argument",
        error_code: ErrorCode = ErrorCode.ARGUMENT_INVALID,
        details: dict[str, Any] | None = None,
        argument: str | None = None,
    ):
        if argument:
            details = details or {}
            details["argument"] = argument
        super().__init__(message=message, error_code=error_code, details=details)


class EventFormatError(E2VException):
    """Malformed event file or event content."""

    def __init__(
        self,
        message: str = "Invalid event data",
        error_code: ErrorCode = ErrorCode.EVENTS_INVALID_FORMAT,
        details: dict[str, Any] | None = None,
        path: str | None = None,
    ):
        if path:
            details = details or {}
            details["path"] = path
        super().__init__(message=message, error_code=error_code, details=details)


class DatasetError(E2VException):
    """Missing or malformed sequence directories."""

    def __init__(
        self,
        message: str = "Dataset error",
        error_code: ErrorCode = ErrorCode.DATASET_INVALID_LAYOUT,
        details: dict[str, Any] | None = None,
        sequence: str | None = None,
    ):
        if sequence:
            details = details or {}
            details["sequence"] = sequence
        super().__init__(message=message, error_code=error_code, details=details)


class TeacherCacheError(E2VException):
    """Missing or corrupt teacher cache entries."""

    def __init__(
        self,
        message: str = "Teacher cache error",
        error_code: ErrorCode = ErrorCode.TEACHER_CACHE_CORRUPT,
        details: dict[str, Any] | None = None,
        sequence: str | None = None,
        frame: int | None = None,
    ):
        if sequence is not None or frame is not None:
            details = details or {}
            if sequence is not None:
                details["sequence"] = sequence
            if frame is not None:
                details["frame"] = frame
        super().__init__(message=message, error_code=error_code, details=details)


class CheckpointError(E2VException):
    """Unreadable checkpoint or unknown format tag."""

    def __init__(
        self,
        message: str = "Invalid checkpoint",
        error_code: ErrorCode = ErrorCode.CHECKPOINT_INVALID,
        details: dict[str, Any] | None = None,
        path: str | None = None,
    ):
        if path:
            details = details or {}
            details["path"] = path
        super().__init__(message=message, error_code=error_code, details=details)


class NumericalError(E2VException):
    """Non-finite values during training or inference."""

    exit_code = ExitCode.NUMERIC

    def __init__(
        self,
        message: str = "Non-finite value encountered",
        error_code: ErrorCode = ErrorCode.NUMERIC_NON_FINITE,
        details: dict[str, Any] | None = None,
        step: int | None = None,
    ):
        if step is not None:
            details = details or {}
            details["step"] = step
        super().__init__(message=message, error_code=error_code, details=details)


class ErrorHandler:
    """Centralized error logging and exit-code resolution."""

    @staticmethod
    def log_error(
        error: Exception,
        command: str | None = None,
        additional_context: dict[str, Any] | None = None,
    ) -> None:
        """Log error with context information.

        Args:
            error: Exception that occurred
            command: CLI command name if available
            additional_context: Additional context information
        """
        context: dict[str, Any] = {
            "error_type": type(error).__name__,
            "error_message": str(error),
            "command": command,
        }
        if isinstance(error, E2VException):
            context["error_details"] = error.details
        if additional_context:
            context.update(additional_context)

        if isinstance(error, (ConfigurationError, InvalidArgumentError)):
            logger.warning(f"Usage error: {error}", extra=context)
        elif isinstance(error, NumericalError):
            logger.error(f"Numeric failure: {error}", extra=context)
        elif isinstance(error, E2VException):
            logger.error(f"Data error: {error}", extra=context)
        else:
            logger.error(f"Unexpected error: {error}", extra=context, exc_info=True)

    @staticmethod
    def exit_code_for(error: Exception) -> ExitCode:
        """Resolve the CLI exit code for an exception."""
        if isinstance(error, E2VException):
            return error.exit_code
        return ExitCode.DATA
