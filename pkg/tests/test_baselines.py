import unittest
import sys
import os

import numpy as np
from numpy.testing import assert_array_equal, assert_allclose

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))
from src.adapt import TTTConfig
from src.constants.status import OptimizerKind
from src.baselines import ActivationStats, actmad_episode, alignment_loss, base_predict, collect_stats
from src.dualnet import DualInputModel, predict_y0
from src.exceptions.handler import ContractError, UnsupportedBatchError
from tests.toy import linear_dataset, tiny_model


class TestCollectStats(unittest.TestCase):
    """Per-layer activation mean and variance"""

    def setUp(self):
        self.model = tiny_model(seed=1)
        self.train = linear_dataset(n=64, seed=0).train()

    def test_matches_two_pass_computation(self):
        stats = collect_stats(self.model, self.train, chunk_size=7)
        capture = []
        self.model.forward(self.train.features, self.model.neutral_like(self.train.features), capture=capture)
        self.assertEqual(stats.sample_count, len(self.train))
        for (mu, var), node in zip(stats.layers, capture):
            assert_allclose(mu, node.value.mean(axis=0), rtol=1e-10, atol=1e-12)
            assert_allclose(var, node.value.var(axis=0), rtol=1e-10, atol=1e-12)

    def test_chunk_size_does_not_matter(self):
        small = collect_stats(self.model, self.train, chunk_size=5)
        whole = collect_stats(self.model, self.train, chunk_size=1000)
        for (mu_a, var_a), (mu_b, var_b) in zip(small.layers, whole.layers):
            assert_allclose(mu_a, mu_b, rtol=1e-10, atol=1e-12)
            assert_allclose(var_a, var_b, rtol=1e-10, atol=1e-12)

    def test_duplicated_rows_give_same_statistics(self):
        index = np.arange(len(self.train))
        doubled = self.train.subset(np.concatenate([index, index]))
        once = collect_stats(self.model, self.train)
        twice = collect_stats(self.model, doubled)
        for (mu_a, var_a), (mu_b, var_b) in zip(once.layers, twice.layers):
            assert_allclose(mu_a, mu_b, rtol=1e-10, atol=1e-12)
            assert_allclose(var_a, var_b, rtol=1e-10, atol=1e-12)

    def test_constant_layer_has_zero_variance(self):
        for entry in self.model.params:
            entry.tensor[...] = 0.0
        self.model.params.tensor("layer0.bias")[:] = 0.5
        stats = collect_stats(self.model, self.train)
        assert_array_equal(stats.layers[0][1], np.zeros(8))
        assert_allclose(stats.layers[0][0], np.full(8, 0.5))

    def test_needs_two_samples(self):
        with self.assertRaises(ContractError):
            collect_stats(self.model, self.train.subset(np.arange(1)))
        with self.assertRaises(ContractError):
            ActivationStats(layers=[], sample_count=1)


class TestActMADEpisode(unittest.TestCase):
    """Alignment, predict, reset"""

    def setUp(self):
        self.model = tiny_model(seed=2)
        dataset = linear_dataset(n=64, seed=1)
        self.stats = collect_stats(self.model, dataset.train())
        self.train_x = dataset.train().features
        self.x = dataset.test().features + 0.5
        self.cfg = TTTConfig(steps=3, lr=1e-2, optimizer=OptimizerKind.ADAM)

    def test_loss_vanishes_on_the_statistics_source(self):
        self.assertLess(float(alignment_loss(self.model, self.stats, self.train_x).value), 1e-10)

    def test_single_row_is_unsupported(self):
        with self.assertRaises(UnsupportedBatchError) as ctx:
            actmad_episode(self.model, self.stats, self.x[:1], self.cfg)
        self.assertEqual(ctx.exception.batch_size, 1)

    def test_weights_reset_after_episode(self):
        snap = self.model.params.snapshot()
        prediction, report = actmad_episode(self.model, self.stats, self.x, self.cfg)
        self.assertTrue(snap.matches(self.model.params))
        self.assertEqual(report.steps_taken, 3)
        self.assertFalse(np.allclose(prediction, predict_y0(self.model, self.x)))

    def test_alignment_reduces_the_loss(self):
        _, report = actmad_episode(self.model, self.stats, self.x, TTTConfig(steps=10, lr=1e-2, optimizer=OptimizerKind.ADAM))
        self.assertLess(report.loss_after, report.loss_before)

    def test_zero_learning_rate_matches_base(self):
        prediction, _ = actmad_episode(self.model, self.stats, self.x, TTTConfig(steps=3, lr=0.0))
        assert_array_equal(prediction, base_predict(self.model, self.x))

    def test_pass_counts(self):
        _, report = actmad_episode(self.model, self.stats, self.x, TTTConfig(steps=4, lr=1e-3))
        self.assertEqual(report.passes.forward, 5)
        self.assertEqual(report.passes.backward, 4)
        self.assertEqual(report.passes.diagnostic, 3)

    def test_depth_mismatch(self):
        shallow = tiny_model(seed=2, hidden=(8,))
        with self.assertRaises(ContractError):
            alignment_loss(shallow, self.stats, self.x)

    def test_model_without_hidden_layers(self):
        model = DualInputModel(3, 1, hidden=[])
        with self.assertRaises(ContractError):
            actmad_episode(model, self.stats, self.x, self.cfg)


class TestBasePredict(unittest.TestCase):

    def test_equals_neutral_forward(self):
        model = tiny_model(seed=3)
        x = np.random.default_rng(0).standard_normal((5, 3))
        assert_array_equal(base_predict(model, x), predict_y0(model, x))


if __name__ == '__main__':
    unittest.main()
