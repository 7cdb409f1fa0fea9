import unittest
import sys
import os

import numpy as np
from numpy.testing import assert_array_equal

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))
from src.constants.status import CorruptionKind
from src.exceptions.handler import ContractError
from src.ood import (
    CorruptionSpec,
    StreamSchedule,
    corrupt,
    holdout_split,
    item_severity,
    make_levels,
    stream,
    stream_arrays
)
from src.dualnet import predict_y0
from src.training import task_error
from tests.toy import linear_dataset, trained_manifold_model


def _zeroing(p: float, seed: int = 0) -> CorruptionSpec:
    return CorruptionSpec(kind=CorruptionKind.FEATURE_ZEROING, severity=p, seed=seed)


class TestCorrupt(unittest.TestCase):
    """Feature zeroing and gaussian noise"""

    def setUp(self):
        self.x = np.random.default_rng(0).uniform(1.0, 2.0, size=(50, 4))

    def test_zero_probability_is_identity(self):
        assert_array_equal(corrupt(_zeroing(0.0), self.x), self.x)

    def test_probability_one_zeroes_everything(self):
        assert_array_equal(corrupt(_zeroing(1.0), self.x), np.zeros_like(self.x))

    def test_zeroed_fraction(self):
        x = np.ones((1000, 100))
        fraction = float(np.mean(corrupt(_zeroing(0.1, seed=3), x) == 0.0))
        self.assertGreaterEqual(fraction, 0.094)
        self.assertLessEqual(fraction, 0.106)

    def test_input_is_not_mutated(self):
        original = self.x.copy()
        corrupt(_zeroing(0.5), self.x)
        corrupt(CorruptionSpec(kind=CorruptionKind.GAUSSIAN_NOISE, severity=1.0), self.x)
        assert_array_equal(self.x, original)

    def test_same_seed_same_output(self):
        assert_array_equal(corrupt(_zeroing(0.3, seed=9), self.x), corrupt(_zeroing(0.3, seed=9), self.x))
        self.assertFalse(np.array_equal(corrupt(_zeroing(0.3, seed=9), self.x), corrupt(_zeroing(0.3, seed=10), self.x)))

    def test_explicit_generator_wins_over_seed(self):
        a = corrupt(_zeroing(0.3, seed=1), self.x, np.random.default_rng(5))
        b = corrupt(_zeroing(0.3, seed=2), self.x, np.random.default_rng(5))
        assert_array_equal(a, b)

    def test_gaussian_noise_scale(self):
        x = np.zeros((2000, 50))
        out = corrupt(CorruptionSpec(kind=CorruptionKind.GAUSSIAN_NOISE, severity=0.5, seed=1), x)
        self.assertAlmostEqual(float(out.std()), 0.5, delta=0.01)

    def test_zero_sigma_is_identity(self):
        spec = CorruptionSpec(kind=CorruptionKind.GAUSSIAN_NOISE, severity=0.0)
        assert_array_equal(corrupt(spec, self.x), self.x)

    def test_invalid_parameters(self):
        with self.assertRaises(ValueError):
            _zeroing(1.5)
        with self.assertRaises(ValueError):
            CorruptionSpec(kind=CorruptionKind.GAUSSIAN_NOISE, severity=-0.1)
        with self.assertRaises(ValueError):
            CorruptionSpec(kind=CorruptionKind.LABEL_RANGE_HOLDOUT, lo=1.0, hi=0.0)


class TestLevels(unittest.TestCase):
    """Ascending severity ladders"""

    def test_four_zeroing_levels(self):
        levels = make_levels(CorruptionKind.FEATURE_ZEROING, [0.05, 0.10, 0.15, 0.20], base_seed=1)
        self.assertEqual([level.severity for level in levels], [0.05, 0.10, 0.15, 0.20])
        self.assertEqual(len({level.seed for level in levels}), 4)

    def test_empty_severities(self):
        self.assertEqual(make_levels(CorruptionKind.GAUSSIAN_NOISE, []), [])

    def test_non_monotone_severities(self):
        with self.assertRaises(ContractError):
            make_levels(CorruptionKind.FEATURE_ZEROING, [0.2, 0.1])
        with self.assertRaises(ContractError):
            make_levels(CorruptionKind.FEATURE_ZEROING, [0.1, 0.1])

    def test_holdout_has_no_ladder(self):
        with self.assertRaises(ContractError):
            make_levels(CorruptionKind.LABEL_RANGE_HOLDOUT, [0.1])

    def test_levels_are_seeded_from_base(self):
        a = make_levels(CorruptionKind.FEATURE_ZEROING, [0.1, 0.2], base_seed=4)
        b = make_levels(CorruptionKind.FEATURE_ZEROING, [0.1, 0.2], base_seed=4)
        c = make_levels(CorruptionKind.FEATURE_ZEROING, [0.1, 0.2], base_seed=5)
        self.assertEqual([s.seed for s in a], [s.seed for s in b])
        self.assertNotEqual([s.seed for s in a], [s.seed for s in c])


class TestStream(unittest.TestCase):
    """Ordered corrupted streams"""

    def setUp(self):
        self.dataset = linear_dataset(n=40, seed=1).test()

    def _schedule(self, severities, items, interpolate=True):
        levels = make_levels(CorruptionKind.FEATURE_ZEROING, severities, base_seed=2)
        return StreamSchedule(levels=levels, items_per_level=items, interpolate=interpolate)

    def test_four_levels_of_25_items(self):
        items = stream(self._schedule([0.05, 0.10, 0.15, 0.20], 25), self.dataset)
        self.assertEqual(len(items), 100)
        levels = [item.level for item in items]
        self.assertEqual(levels, sorted(levels))
        self.assertEqual(levels[0], 0)
        self.assertEqual(levels[-1], 3)

    def test_linear_ramp_midpoint(self):
        schedule = self._schedule([0.0, 0.2], 50)
        self.assertAlmostEqual(item_severity(schedule, 50), 0.1, delta=0.002)
        self.assertEqual(item_severity(schedule, 0), 0.0)
        self.assertAlmostEqual(item_severity(schedule, 99), 0.2, places=15)

    def test_ramp_is_non_decreasing(self):
        schedule = self._schedule([0.05, 0.10, 0.15, 0.20], 25)
        severities = [item_severity(schedule, t) for t in range(schedule.total_items)]
        self.assertTrue(all(b >= a for a, b in zip(severities, severities[1:])))

    def test_single_level_without_interpolation_is_plain_corruption(self):
        schedule = self._schedule([0.0], len(self.dataset), interpolate=False)
        x, y, level, severity = stream_arrays(stream(schedule, self.dataset))
        assert_array_equal(x, self.dataset.features)
        assert_array_equal(y, self.dataset.labels)
        assert_array_equal(level, np.zeros(len(self.dataset), dtype=np.int64))
        assert_array_equal(severity, np.zeros(len(self.dataset)))

    def test_without_interpolation_items_use_level_severity(self):
        schedule = self._schedule([0.1, 0.3], 5, interpolate=False)
        self.assertEqual([item.severity for item in stream(schedule, self.dataset)], [0.1] * 5 + [0.3] * 5)

    def test_stream_wraps_over_rows(self):
        schedule = self._schedule([0.0], 2 * len(self.dataset), interpolate=False)
        x, _, _, _ = stream_arrays(stream(schedule, self.dataset))
        assert_array_equal(x[len(self.dataset):], self.dataset.features)

    def test_deterministic(self):
        schedule = self._schedule([0.1, 0.4], 10)
        a, _, _, _ = stream_arrays(stream(schedule, self.dataset))
        b, _, _, _ = stream_arrays(stream(schedule, self.dataset))
        assert_array_equal(a, b)

    def test_empty_dataset(self):
        with self.assertRaises(ContractError):
            stream(self._schedule([0.1], 3), self.dataset.subset(np.arange(0)))

    def test_empty_stream_arrays(self):
        x, y, level, severity = stream_arrays([])
        self.assertEqual(len(x), 0)
        self.assertEqual(len(level), 0)


class TestHoldoutSplit(unittest.TestCase):
    """Label-range extrapolation split"""

    def setUp(self):
        self.dataset = linear_dataset(n=80, seed=3)

    def test_train_inside_test_outside(self):
        split = holdout_split(self.dataset, -0.5, 0.5)
        train_labels = split.train().labels[:, 0]
        test_labels = split.test().labels[:, 0]
        self.assertTrue(np.all((train_labels >= -0.5) & (train_labels <= 0.5)))
        self.assertTrue(np.all((test_labels < -0.5) | (test_labels > 0.5)))
        self.assertEqual(len(split.train()) + len(split.test()), len(self.dataset))

    def test_empty_side(self):
        with self.assertRaises(ContractError):
            holdout_split(self.dataset, -100.0, 100.0)

    def test_reversed_bounds(self):
        with self.assertRaises(ContractError):
            holdout_split(self.dataset, 1.0, -1.0)


class TestZeroingDegradesBase(unittest.TestCase):
    """A non-adapted model gets worse as the zeroing probability grows"""

    SEVERITIES = (0.05, 0.10, 0.15, 0.20)

    def _errors(self, seed: int) -> np.ndarray:
        model, dataset = trained_manifold_model(seed)
        x = np.tile(dataset.features, (4, 1))
        y = np.tile(dataset.labels, (4, 1))
        errors = []
        for p in self.SEVERITIES:
            # common draws: each level zeroes a superset of the previous one
            shifted = corrupt(_zeroing(p), x, np.random.default_rng(100 + seed))
            errors.append(task_error(model, predict_y0(model, shifted), y))
        return np.array(errors)

    def test_error_is_non_decreasing_in_most_seeds(self):
        monotone = [bool(np.all(np.diff(self._errors(seed)) >= 0.0)) for seed in range(5)]
        self.assertGreaterEqual(sum(monotone), 3, monotone)

    def test_most_severe_level_is_worst_on_average(self):
        errors = np.mean([self._errors(seed) for seed in range(5)], axis=0)
        self.assertEqual(int(np.argmax(errors)), len(self.SEVERITIES) - 1)


if __name__ == '__main__':
    unittest.main()
