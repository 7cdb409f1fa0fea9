from .handler import (
    LabError,
    ValidationError,
    DimensionError,
    ContractError,
    NumericError,
    UnsupportedBatchError,
    DatasetError,
    ConfigError,
    FileOperationError,
    create_error_response,
    format_error_message
)

__all__ = [
    "LabError",
    "ValidationError",
    "DimensionError",
    "ContractError",
    "NumericError",
    "UnsupportedBatchError",
    "DatasetError",
    "ConfigError",
    "FileOperationError",
    "create_error_response",
    "format_error_message"
]
