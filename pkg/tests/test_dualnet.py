import unittest
import tempfile
import shutil
from pathlib import Path
import sys
import os

import numpy as np
from numpy.testing import assert_array_equal, assert_allclose

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))
from src.constants.status import Activation, NeutralKind, TaskKind
from src.dualnet import (
    DualInputModel,
    ModelSpec,
    default_neutral,
    forward,
    load_weights,
    neutral_signal,
    predict_pair,
    predict_y0,
    save_weights
)
from src.dualnet.serialization import MAGIC
from src.exceptions.handler import ContractError, DimensionError, FileOperationError
from tests.toy import tiny_model


class TestDualInputModel(unittest.TestCase):
    """Forward pass of f(x, aux)"""

    def setUp(self):
        self.rng = np.random.default_rng(0)
        self.model = tiny_model(seed=1, input_dim=3, label_dim=2)
        self.x = self.rng.standard_normal((5, 3))

    def test_layer_widths(self):
        self.assertEqual(self.model.layer_widths, [5, 8, 8, 2])
        self.assertEqual(self.model.params.tensor("layer0.weight").shape, (5, 8))
        self.assertEqual(self.model.params.tensor("layer2.bias").shape, (2,))

    def test_zero_weights_give_zero_output(self):
        for entry in self.model.params:
            self.model.params.assign(entry.name, np.zeros_like(entry.tensor))
        out = forward(self.model, self.x, self.rng.standard_normal((5, 2))).value
        assert_array_equal(out, np.zeros((5, 2)))

    def test_forward_is_deterministic(self):
        aux = self.rng.standard_normal((5, 2))
        assert_array_equal(self.model.forward(self.x, aux).value, self.model.forward(self.x, aux).value)

    def test_aux_is_wired_in(self):
        a1 = self.model.forward(self.x, np.zeros((5, 2))).value
        a2 = self.model.forward(self.x, np.ones((5, 2))).value
        self.assertFalse(np.array_equal(a1, a2))

    def test_single_row_input(self):
        out = self.model.forward(self.x[0], np.zeros(2))
        self.assertEqual(out.shape, (2,))
        assert_allclose(out.value, self.model.forward(self.x[:1], np.zeros((1, 2))).value[0], rtol=1e-14)

    def test_shape_mismatch(self):
        with self.assertRaises(DimensionError):
            self.model.forward(np.ones((5, 4)), np.zeros((5, 2)))
        with self.assertRaises(DimensionError):
            self.model.forward(self.x, np.zeros((4, 2)))

    def test_capture_collects_hidden_layers(self):
        capture = []
        self.model.forward(self.x, np.zeros((5, 2)), capture=capture)
        self.assertEqual([node.shape for node in capture], [(5, 8), (5, 8)])

    def test_clone_is_independent(self):
        twin = self.model.clone()
        twin.params.tensor("layer0.bias")[:] = 1.0
        assert_array_equal(self.model.params.tensor("layer0.bias"), np.zeros(8))

    def test_from_spec(self):
        spec = ModelSpec(hidden=[4], activation=Activation.RELU)
        model = DualInputModel.from_spec(spec, input_dim=2, label_dim=1, seed=3)
        self.assertEqual(model.layer_widths, [3, 4, 1])
        self.assertEqual(model.activation, Activation.RELU)


class TestPredictions(unittest.TestCase):
    """y0 and (y0, y1) pairs"""

    def setUp(self):
        self.model = tiny_model(seed=2, label_dim=2)
        self.x = np.random.default_rng(1).standard_normal((6, 3))

    def test_predict_y0_is_forward_with_neutral(self):
        expected = self.model.forward(self.x, np.zeros((6, 2))).value
        assert_array_equal(predict_y0(self.model, self.x), expected)

    def test_rows_are_independent(self):
        perm = np.array([5, 3, 1, 0, 2, 4])
        assert_allclose(predict_y0(self.model, self.x[perm]), predict_y0(self.model, self.x)[perm], rtol=1e-12, atol=1e-14)

    def test_pair_equal_when_aux_is_ignored(self):
        # rows 3.. of the first weight read aux
        self.model.params.tensor("layer0.weight")[3:] = 0.0
        pair = predict_pair(self.model, self.model, self.x)
        assert_allclose(pair.y0, pair.y1, atol=1e-12)

    def test_distinct_models_disagree(self):
        pair = predict_pair(self.model, tiny_model(seed=99, label_dim=2), self.x)
        self.assertFalse(np.allclose(pair.y0, pair.y1))

    def test_pair_dimension_mismatch(self):
        with self.assertRaises(ContractError):
            predict_pair(self.model, tiny_model(seed=2, label_dim=2, hidden=(4,)), self.x)


class TestNeutralSignal(unittest.TestCase):
    """The "no label" aux"""

    def test_zeros(self):
        assert_array_equal(neutral_signal(3).value, [0.0, 0.0, 0.0])

    def test_constant(self):
        assert_array_equal(neutral_signal(2, NeutralKind.CONSTANT, -1.0).value, [-1.0, -1.0])

    def test_classification_default_is_uniform_and_not_one_hot(self):
        value = default_neutral(TaskKind.CLASSIFICATION, 4).value
        assert_allclose(value, np.full(4, 0.25))
        for row in np.eye(4):
            self.assertFalse(np.array_equal(value, row))

    def test_regression_default_is_zeros(self):
        assert_array_equal(default_neutral(TaskKind.REGRESSION, 2).value, [0.0, 0.0])

    def test_signal_is_read_only(self):
        with self.assertRaises(ValueError):
            neutral_signal(2).value[0] = 1.0


class TestWeightsFile(unittest.TestCase):
    """Binary weights format"""

    def setUp(self):
        self.temp_dir = Path(tempfile.mkdtemp())

    def tearDown(self):
        if self.temp_dir.exists():
            shutil.rmtree(self.temp_dir)

    def test_save_and_load_reproduce_parameters(self):
        model = tiny_model(seed=5, input_dim=4, label_dim=3, hidden=(6, 5), activation=Activation.RELU,
                           task=TaskKind.CLASSIFICATION)
        path = save_weights(model, self.temp_dir / "w.bin")
        loaded = load_weights(path)
        self.assertTrue(loaded.same_architecture(model))
        self.assertTrue(model.params.snapshot().matches(loaded.params))
        assert_array_equal(loaded.neutral.value, np.full(3, 1.0 / 3.0))

    def test_header_layout(self):
        model = tiny_model(seed=6, input_dim=3, label_dim=1, hidden=(4,))
        path = save_weights(model, self.temp_dir / "w.bin")
        data = path.read_bytes()
        self.assertTrue(data.startswith(MAGIC))
        header = np.frombuffer(data[len(MAGIC):len(MAGIC) + 4 * 6], dtype="<i4")
        assert_array_equal(header, [3, 1, 1, 4, 1, 0])
        self.assertEqual(len(data), len(MAGIC) + 4 * 6 + 8 * model.params.size())

    def test_bad_magic(self):
        path = self.temp_dir / "bad.bin"
        path.write_bytes(b"NOPE!" + bytes(40))
        with self.assertRaises(FileOperationError):
            load_weights(path)

    def test_truncated_body(self):
        path = save_weights(tiny_model(seed=7), self.temp_dir / "w.bin")
        path.write_bytes(path.read_bytes()[:-8])
        with self.assertRaises(FileOperationError):
            load_weights(path)

    def test_missing_file(self):
        with self.assertRaises(FileOperationError) as ctx:
            load_weights(self.temp_dir / "absent.bin")
        self.assertIn("absent.bin", ctx.exception.file_path)


if __name__ == '__main__':
    unittest.main()
