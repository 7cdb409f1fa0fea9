"""Small builders shared by the test suites."""
import os
import sys
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))
from src.bench.config import ExperimentConfig, parse_experiment_config
from src.bench.datasets import SyntheticSpec, prepare_dataset, synth_dataset
from src.constants.status import Activation, NeutralKind, SyntheticFn, TaskKind
from src.dualnet.model import DualInputModel, neutral_signal
from src.states.dataset import Dataset
from src.training.trainer import TrainConfig, fit


def tiny_model(
    seed: int = 0,
    input_dim: int = 3,
    label_dim: int = 1,
    hidden: Sequence[int] = (8, 8),
    activation: Activation = Activation.ELU,
    task: TaskKind = TaskKind.REGRESSION
) -> DualInputModel:
    return DualInputModel(input_dim, label_dim, hidden=hidden, activation=activation, task=task, seed=seed)


def linear_dataset(n: int = 64, input_dim: int = 3, seed: int = 0, test_fraction: float = 0.25) -> Dataset:
    """y = x·A for a fixed random A, standardized like any other dataset."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=(n, input_dim))
    a = rng.standard_normal((input_dim, 1))
    return prepare_dataset(x, x @ a, split_seed=seed, test_fraction=test_fraction, name="linear")


def blobs_dataset(n: int = 60, input_dim: int = 2, classes: int = 3, seed: int = 0) -> Dataset:
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-3.0, 3.0, size=(classes, input_dim))
    labels = rng.integers(0, classes, size=n)
    x = centers[labels] + 0.1 * rng.standard_normal((n, input_dim))
    return prepare_dataset(x, np.eye(classes)[labels], task=TaskKind.CLASSIFICATION, split_seed=seed, name="blobs")


def grid_config_dict(output_path: str, **overrides) -> dict:
    """A desk-fast grid: tiny friedman data, tiny model, two levels."""
    data = {
        "dataset": {"kind": "synthetic", "fn": "friedman", "n": 60, "input_dim": 5, "noise_sigma": 0.1},
        "model": {"hidden": [8, 8]},
        "train": {"epochs": 5, "batch_size": 16},
        "ttt": {"steps": 2, "lr": 1e-3},
        "levels": {"kind": "feature_zeroing", "severities": [0.05, 0.2]},
        "methods": ["base", "actmad_lite", "it3_offline", "it3_naive", "it3_online"],
        "seeds": [0],
        "batch_sizes": [8],
        "output_path": output_path
    }
    data.update(overrides)
    return data


def grid_config(output_path: str, **overrides) -> ExperimentConfig:
    return parse_experiment_config(grid_config_dict(output_path, **overrides))


FAR_NEUTRAL = -4.0


def manifold_dataset(seed: int = 0, n: int = 300) -> Dataset:
    """Six correlated columns driven by two latent factors; linear target with label noise."""
    spec = SyntheticSpec(
        fn=SyntheticFn.LINEAR,
        n=n,
        input_dim=6,
        latent_dim=2,
        feature_noise=0.02,
        noise_sigma=0.1,
        coefficients=[2.0, -1.5],
        test_fraction=0.2
    )
    return synth_dataset(spec, seed=seed)


@lru_cache(maxsize=None)
def trained_manifold_model(seed: int = 0) -> Tuple[DualInputModel, Dataset]:
    """
    A small model pre-trained on manifold_dataset(seed), shared across suites.

    The neutral signal sits outside the standardized label range. Callers
    that mutate the weights must clone the model first.
    """
    dataset = manifold_dataset(seed)
    model = DualInputModel(
        6,
        1,
        hidden=(16, 16),
        neutral=neutral_signal(1, NeutralKind.CONSTANT, FAR_NEUTRAL),
        seed=seed
    )
    fit(model, dataset.train(), TrainConfig(epochs=150, batch_size=32, lr=3e-3, shuffle_seed=seed))
    return model, dataset
