from .logging import get_logger, set_global_level, log_execution_time
from .concurrent import run_cells
from .seeding import derive_seed, make_rng, arrays_checksum
from .validation import (
    validate_not_none,
    validate_path,
    validate_file_exists,
    validate_range,
    validate_positive_integer,
    validate_strictly_increasing
)

__all__ = [
    "get_logger",
    "set_global_level",
    "log_execution_time",
    "run_cells",
    "derive_seed",
    "make_rng",
    "arrays_checksum",
    "validate_not_none",
    "validate_path",
    "validate_file_exists",
    "validate_range",
    "validate_positive_integer",
    "validate_strictly_increasing"
]
