import unittest
import sys
import os

import numpy as np
from numpy.testing import assert_array_equal

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))
from src.adapt import idempotence_error
from src.constants.status import CorruptionKind, EvalMode, OptimizerKind, TaskKind
from src.diffcore import finite_diff_check
from src.dualnet.model import DualInputModel
from src.exceptions.handler import ContractError, NumericError, ValidationError
from src.ood import CorruptionSpec, corrupt
from src.training import TrainConfig, composite_loss, eval_task_error, fit, task_error
from tests.toy import blobs_dataset, linear_dataset, tiny_model, trained_manifold_model


def _linear_unit(w_x: float, w_aux: float, bias: float) -> DualInputModel:
    """f(x, a) = w_x·x + w_aux·a + bias, no hidden layers."""
    model = DualInputModel(1, 1, hidden=[])
    model.params.assign("layer0.weight", [[w_x], [w_aux]])
    model.params.assign("layer0.bias", [bias])
    return model


class TestCompositeLoss(unittest.TestCase):
    """‖f(x, y) − y‖ + ‖f(x, 0) − y‖"""

    def test_arithmetic_example(self):
        # f(x, y) = y + 1 and f(x, 0) = y − 2 at x = 1, y = 3
        model = _linear_unit(1.0, 1.0, 0.0)
        loss = composite_loss(model, np.array([[1.0]]), np.array([[3.0]]))
        self.assertAlmostEqual(float(loss.value), 5.0, places=12)

    def test_exact_model_has_zero_loss(self):
        model = _linear_unit(0.0, 1.0, 0.0)
        loss = composite_loss(model, np.array([[2.0], [-1.0]]), np.zeros((2, 1)))
        self.assertEqual(float(loss.value), 0.0)

    def test_term_weights(self):
        model = _linear_unit(1.0, 1.0, 0.0)
        loss = composite_loss(model, np.array([[1.0]]), np.array([[3.0]]), aux_weight=0.0, neutral_weight=2.0)
        self.assertAlmostEqual(float(loss.value), 8.0, places=12)

    def test_gradient_matches_finite_differences(self):
        model = tiny_model(seed=3, hidden=(6,))
        rng = np.random.default_rng(4)
        x = rng.uniform(-1, 1, size=(4, 3))
        y = rng.uniform(-1, 1, size=(4, 1))
        report = finite_diff_check(lambda p: composite_loss(model, x, y), model.params)
        self.assertTrue(report.passed, report.errors)

    def test_classification_uses_cross_entropy(self):
        model = tiny_model(seed=5, input_dim=2, label_dim=3, task=TaskKind.CLASSIFICATION)
        x = np.zeros((2, 2))
        y = np.eye(3)[[0, 2]]
        for entry in model.params:
            model.params.assign(entry.name, np.zeros_like(entry.tensor))
        # uniform logits: each term is log(3)
        self.assertAlmostEqual(float(composite_loss(model, x, y).value), 2.0 * np.log(3.0), places=12)


class TestFit(unittest.TestCase):
    """Supervised pre-training"""

    def setUp(self):
        self.dataset = linear_dataset(n=64, seed=0)
        self.train = self.dataset.train()

    def test_zero_epochs_leaves_model_unchanged(self):
        model = tiny_model(seed=1)
        snap = model.params.snapshot()
        report = fit(model, self.train, TrainConfig(epochs=0, batch_size=16))
        self.assertEqual(report.curve, [])
        self.assertIsNone(report.final_loss)
        self.assertTrue(snap.matches(model.params))

    def test_same_seed_gives_identical_weights(self):
        cfg = TrainConfig(epochs=3, batch_size=16, shuffle_seed=7)
        a, b = tiny_model(seed=1), tiny_model(seed=1)
        fit(a, self.train, cfg)
        fit(b, self.train, cfg)
        for left, right in zip(a.params, b.params):
            assert_array_equal(left.tensor, right.tensor)

    def test_learns_a_linear_map(self):
        # y = x·A is exactly realizable without hidden layers
        model = DualInputModel(3, 1, hidden=[], seed=2)
        report = fit(model, self.train, TrainConfig(epochs=500, batch_size=16, lr=1e-2, shuffle_seed=1))
        x, y = self.train.features, self.train.labels
        self.assertEqual(report.epochs_run, 500)
        self.assertLess(float(composite_loss(model, x, y).value), 1e-3)
        self.assertLess(np.mean(np.abs(model.forward(x, y).value - y)), 0.05)
        self.assertLess(np.mean(np.abs(model.forward(x, model.neutral_like(x)).value - y)), 0.05)
        self.assertLess(eval_task_error(model, self.train), 1e-3)

    def test_hidden_layers_fit_a_linear_map(self):
        model = tiny_model(seed=2, hidden=(16, 16))
        report = fit(model, self.train, TrainConfig(epochs=300, batch_size=16, lr=5e-3, shuffle_seed=1))
        self.assertLess(report.final_loss, 0.1 * report.curve[0])
        self.assertLess(eval_task_error(model, self.train), 0.1)

    def test_early_stop(self):
        report = fit(tiny_model(seed=3), self.train, TrainConfig(epochs=50, batch_size=16, early_stop_loss=1e9))
        self.assertTrue(report.stopped_early)
        self.assertEqual(report.epochs_run, 1)

    def test_batch_size_larger_than_dataset(self):
        with self.assertRaises(ValidationError):
            fit(tiny_model(), self.train, TrainConfig(epochs=1, batch_size=len(self.train) + 1))

    def test_empty_dataset(self):
        empty = linear_dataset(n=20, test_fraction=0.0).test()
        with self.assertRaises(ContractError):
            fit(tiny_model(), empty, TrainConfig(epochs=1, batch_size=1))

    def test_non_finite_loss_reports_epoch(self):
        model = tiny_model(seed=4)
        model.params.tensor("layer0.bias")[0] = np.nan
        with self.assertRaises(NumericError) as ctx:
            fit(model, self.train, TrainConfig(epochs=2, batch_size=16, optimizer=OptimizerKind.SGD))
        self.assertEqual(ctx.exception.epoch, 0)

    def test_report_serializes(self):
        report = fit(tiny_model(seed=5), self.train, TrainConfig(epochs=2, batch_size=16))
        data = report.to_dict()
        self.assertEqual(data["epochs_run"], 2)
        self.assertEqual(data["final_loss"], report.curve[-1])


class TestIdempotenceAfterFit(unittest.TestCase):
    """Training rows are closer to idempotent than shifted rows"""

    def test_training_rows_beat_zeroed_rows_in_every_seed(self):
        zeroing = CorruptionSpec(kind=CorruptionKind.FEATURE_ZEROING, severity=0.2, seed=11)
        for seed in range(5):
            with self.subTest(seed=seed):
                model, dataset = trained_manifold_model(seed)
                train_x = dataset.train().features
                d_train = idempotence_error(model, None, train_x)
                d_shifted = idempotence_error(model, None, corrupt(zeroing, train_x))
                self.assertLess(d_train, d_shifted)


class TestTaskError(unittest.TestCase):
    """MSE and error rate"""

    def test_zero_predictor_error_is_label_variance(self):
        train = linear_dataset(n=40, seed=2).train()
        model = tiny_model(seed=1)
        for entry in model.params:
            model.params.assign(entry.name, np.zeros_like(entry.tensor))
        self.assertAlmostEqual(eval_task_error(model, train), float(np.var(train.labels)), places=12)

    def test_perfect_predictions(self):
        model = tiny_model()
        labels = np.random.default_rng(0).standard_normal((5, 1))
        self.assertEqual(task_error(model, labels.copy(), labels), 0.0)

    def test_classification_error_rate(self):
        model = tiny_model(label_dim=3, task=TaskKind.CLASSIFICATION)
        labels = np.eye(3)[[0, 1, 2, 0]]
        logits = np.array([[5.0, 0, 0], [0, 5.0, 0], [5.0, 0, 0], [0, 0, 5.0]])
        self.assertEqual(task_error(model, logits, labels), 0.5)

    def test_oracle_aux_mode(self):
        dataset = blobs_dataset()
        model = tiny_model(seed=3, input_dim=2, label_dim=3, task=TaskKind.CLASSIFICATION)
        value = eval_task_error(model, dataset.test(), EvalMode.ORACLE_AUX)
        self.assertGreaterEqual(value, 0.0)
        self.assertLessEqual(value, 1.0)

    def test_empty_dataset(self):
        with self.assertRaises(ContractError):
            eval_task_error(tiny_model(), linear_dataset(n=20, test_fraction=0.0).test())


if __name__ == '__main__':
    unittest.main()
