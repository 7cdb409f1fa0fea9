import unittest
import tempfile
import shutil
from pathlib import Path
import sys
import os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))
from src.utils.validation import (
    validate_not_none,
    validate_file_exists,
    validate_path,
    validate_positive_integer,
    validate_range,
    validate_strictly_increasing
)
from src.exceptions.handler import ContractError, FileOperationError, ValidationError


class TestValidationUtils(unittest.TestCase):
    """Unit tests for validation.py"""

    def setUp(self):
        self.temp_dir = Path(tempfile.mkdtemp())

    def tearDown(self):
        if self.temp_dir.exists():
            shutil.rmtree(self.temp_dir)

    def test_validate_not_none_invalid(self):
        with self.assertRaises(ValidationError) as ctx:
            validate_not_none(None, "test_field")
        self.assertEqual(ctx.exception.field, "test_field")

    def test_validate_not_none_valid(self):
        validate_not_none(0, "test_field")

    def test_validate_path_valid(self):
        self.assertIsInstance(validate_path("/valid/path"), Path)

    def test_validate_path_empty(self):
        with self.assertRaises(ValidationError):
            validate_path("   ")

    def test_validate_file_exists(self):
        path = self.temp_dir / "weights.bin"
        path.write_bytes(b"x")
        self.assertEqual(validate_file_exists(str(path)), path)

    def test_validate_file_exists_missing(self):
        with self.assertRaises(FileOperationError):
            validate_file_exists(self.temp_dir / "missing.bin")

    def test_validate_file_exists_directory(self):
        with self.assertRaises(FileOperationError):
            validate_file_exists(self.temp_dir)

    def test_validate_positive_integer(self):
        validate_positive_integer(3, "steps")
        for bad in (0, -1, 2.5, True):
            with self.subTest(bad=bad):
                with self.assertRaises(ValidationError):
                    validate_positive_integer(bad, "steps")

    def test_validate_range(self):
        validate_range(0.5, "decay", 0.0, 1.0)
        validate_range(1.0, "decay", 0.0, 1.0)
        with self.assertRaises(ValidationError):
            validate_range(1.5, "decay", 0.0, 1.0)
        with self.assertRaises(ValidationError):
            validate_range(-0.1, "decay", 0.0, 1.0)

    def test_validate_range_nan(self):
        with self.assertRaises(ValidationError):
            validate_range(float("nan"), "lr", 0.0)

    def test_validate_strictly_increasing(self):
        validate_strictly_increasing([], "severities")
        validate_strictly_increasing([0.1], "severities")
        validate_strictly_increasing([0.05, 0.1, 0.2], "severities")
        with self.assertRaises(ContractError):
            validate_strictly_increasing([0.1, 0.1], "severities")


if __name__ == '__main__':
    unittest.main()
