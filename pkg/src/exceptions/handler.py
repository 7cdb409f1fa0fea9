from typing import Optional, Sequence


class LabError(Exception):
    """Base exception for all laboratory errors."""

    def __init__(self, message: str, details: Optional[dict] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ValidationError(LabError):
    """Raised when an argument or configuration value is invalid."""

    def __init__(self, message: str, field: Optional[str] = None, details: Optional[dict] = None):
        super().__init__(message, details)
        self.field = field


class DimensionError(LabError):
    """Raised when tensor shapes do not agree."""

    def __init__(self, message: str, shapes: Sequence[tuple] = (), details: Optional[dict] = None):
        shapes = [tuple(s) for s in shapes]
        if shapes:
            message = f"{message} (shapes: {', '.join(str(s) for s in shapes)})"
        super().__init__(message, details)
        self.shapes = shapes


class ContractError(LabError):
    """Raised when a pre-condition or structural contract is violated."""
    pass


class NumericError(LabError):
    """Raised when a loss or gradient stops being finite."""

    def __init__(
        self,
        message: str,
        parameter: Optional[str] = None,
        epoch: Optional[int] = None,
        details: Optional[dict] = None
    ):
        super().__init__(message, details)
        self.parameter = parameter
        self.epoch = epoch


class UnsupportedBatchError(ContractError):
    """Raised when a method needs batch statistics but got too few samples."""

    def __init__(self, message: str, batch_size: int, details: Optional[dict] = None):
        super().__init__(message, details)
        self.batch_size = batch_size


class DatasetError(LabError):
    """Raised when a dataset cannot be parsed or is unusable."""

    def __init__(
        self,
        message: str,
        file_path: Optional[str] = None,
        row: Optional[int] = None,
        column: Optional[str] = None,
        details: Optional[dict] = None
    ):
        super().__init__(message, details)
        self.file_path = file_path
        self.row = row
        self.column = column


class ConfigError(LabError):
    """Raised when an experiment configuration cannot be loaded."""

    def __init__(self, message: str, file_path: Optional[str] = None, details: Optional[dict] = None):
        super().__init__(message, details)
        self.file_path = file_path


class FileOperationError(LabError):
    """Raised when reading or writing an artifact fails."""

    def __init__(self, message: str, file_path: Optional[str] = None, details: Optional[dict] = None):
        super().__init__(message, details)
        self.file_path = file_path


def create_error_response(
    error: Exception,
    status: str = "aborted",
    include_traceback: bool = False
) -> dict:
    """
    Create a standardized error response dictionary.

    Args:
        error: The exception that occurred
        status: The status value to set (default: "aborted")
        include_traceback: Whether to include full traceback (default: False)

    Returns:
        Dictionary with error information
    """
    response = {
        "status": status,
        "error_type": type(error).__name__,
        "errors": [str(error)],
        "success": False
    }

    if getattr(error, "details", None):
        response["error_details"] = error.details

    for attribute in ("field", "parameter", "epoch", "batch_size", "file_path", "row", "column"):
        value = getattr(error, attribute, None)
        if value is not None:
            response[attribute] = value

    if include_traceback:
        import traceback
        response["traceback"] = "".join(
            traceback.format_exception(type(error), error, error.__traceback__)
        )

    return response


def format_error_message(error: Exception, context: Optional[str] = None) -> str:
    """
    Format an error message with optional context.

    Args:
        error: The exception that occurred
        context: Optional context information

    Returns:
        Formatted error message
    """
    message = str(error)

    if context:
        message = f"{context}: {message}"

    if isinstance(error, LabError) and error.details:
        details_str = ", ".join([f"{k}={v}" for k, v in error.details.items()])
        if details_str:
            message = f"{message} ({details_str})"

    return message
