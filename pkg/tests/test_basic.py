import unittest
import sys
import os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))
from src.config import Settings, settings
from src.exceptions.handler import (
    ContractError,
    DatasetError,
    DimensionError,
    LabError,
    NumericError,
    UnsupportedBatchError,
    create_error_response,
    format_error_message
)
from src.utils.seeding import arrays_checksum, derive_seed, make_rng

import numpy as np


class TestSettings(unittest.TestCase):

    def test_config_loaded(self):
        self.assertGreater(settings.check_tolerance, 0)
        self.assertGreater(settings.check_step, 0)
        self.assertGreaterEqual(settings.workers, 1)

    def test_environment_override(self):
        os.environ["ITTT_SEED"] = "11"
        try:
            self.assertEqual(Settings().seed, 11)
        finally:
            del os.environ["ITTT_SEED"]


class TestErrors(unittest.TestCase):

    def test_hierarchy(self):
        self.assertTrue(issubclass(UnsupportedBatchError, ContractError))
        self.assertTrue(issubclass(NumericError, LabError))

    def test_dimension_error_lists_shapes(self):
        error = DimensionError("matmul", [(2, 3), (4, 5)])
        self.assertEqual(str(error), "matmul (shapes: (2, 3), (4, 5))")

    def test_error_response(self):
        response = create_error_response(NumericError("loss is nan", parameter="layer0.weight", epoch=3))
        self.assertEqual(response["status"], "aborted")
        self.assertEqual(response["error_type"], "NumericError")
        self.assertEqual(response["parameter"], "layer0.weight")
        self.assertEqual(response["epoch"], 3)
        self.assertFalse(response["success"])
        self.assertNotIn("traceback", response)

    def test_error_response_with_details(self):
        response = create_error_response(DatasetError("bad cell", file_path="d.csv", row=3, column="y"))
        self.assertEqual((response["file_path"], response["row"], response["column"]), ("d.csv", 3, "y"))

    def test_format_error_message(self):
        error = ContractError("snapshot mismatch", {"seed": 2})
        self.assertEqual(format_error_message(error, "seed 2"), "seed 2: snapshot mismatch (seed=2)")


class TestSeeding(unittest.TestCase):

    def test_derive_seed_is_stable_and_keyed(self):
        self.assertEqual(derive_seed(0, "init"), derive_seed(0, "init"))
        self.assertNotEqual(derive_seed(0, "init"), derive_seed(0, "shuffle"))
        self.assertNotEqual(derive_seed(0, "level", 1), derive_seed(1, "level", 0))
        self.assertGreaterEqual(derive_seed(5, "x"), 0)

    def test_make_rng(self):
        a = make_rng(3, "probe").standard_normal(4)
        b = make_rng(3, "probe").standard_normal(4)
        self.assertTrue(np.array_equal(a, b))

    def test_checksum_depends_on_shape(self):
        flat = np.arange(6.0)
        self.assertNotEqual(arrays_checksum([flat]), arrays_checksum([flat.reshape(2, 3)]))
        self.assertEqual(arrays_checksum([flat]), arrays_checksum([flat.copy()]))


if __name__ == '__main__':
    unittest.main()
