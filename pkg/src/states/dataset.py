from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from ..constants.status import TaskKind
from ..exceptions.handler import DimensionError


@dataclass(frozen=True, eq=False)
class Standardization:
    """Per-column (mean, std) recorded from the train split."""
    mean: np.ndarray
    std: np.ndarray

    def apply(self, values: np.ndarray) -> np.ndarray:
        return (values - self.mean) / self.std

    def invert(self, values: np.ndarray) -> np.ndarray:
        return values * self.std + self.mean


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Standardized features and labels plus a train/test split.

    Features are always standardized with train-split statistics;
    regression labels are standardized the same way, one-hot labels are
    left as they are (label_stats is None).
    """
    features: np.ndarray
    labels: np.ndarray
    train_index: np.ndarray
    test_index: np.ndarray
    feature_stats: Standardization
    label_stats: Optional[Standardization] = None
    task: TaskKind = TaskKind.REGRESSION
    feature_names: List[str] = field(default_factory=list)
    label_names: List[str] = field(default_factory=list)
    name: str = "dataset"

    def __post_init__(self):
        if self.features.ndim != 2 or self.labels.ndim != 2 or len(self.features) != len(self.labels):
            raise DimensionError("Dataset needs [n×d] features and [n×l] labels", [self.features.shape, self.labels.shape])

    def __len__(self) -> int:
        return len(self.features)

    @property
    def input_dim(self) -> int:
        return self.features.shape[1]

    @property
    def label_dim(self) -> int:
        return self.labels.shape[1]

    def raw_features(self) -> np.ndarray:
        return self.feature_stats.invert(self.features)

    def raw_labels(self) -> np.ndarray:
        return self.label_stats.invert(self.labels) if self.label_stats is not None else self.labels.copy()

    def subset(self, index: np.ndarray, name: Optional[str] = None) -> "Dataset":
        """Rows at `index` as a dataset whose train split is every row."""
        index = np.asarray(index, dtype=np.int64)
        return replace(
            self,
            features=self.features[index],
            labels=self.labels[index],
            train_index=np.arange(len(index)),
            test_index=np.arange(0),
            name=name or self.name
        )

    def train(self) -> "Dataset":
        return self.subset(self.train_index, f"{self.name}[train]")

    def test(self) -> "Dataset":
        return self.subset(self.test_index, f"{self.name}[test]")

    def with_split(self, train_index: np.ndarray, test_index: np.ndarray, name: Optional[str] = None) -> "Dataset":
        return replace(
            self,
            train_index=np.asarray(train_index, dtype=np.int64),
            test_index=np.asarray(test_index, dtype=np.int64),
            name=name or self.name
        )

    def batches(self, batch_size: int):
        """Consecutive (x, y) chunks in row order; the last one may be short."""
        for start in range(0, len(self), batch_size):
            yield self.features[start:start + batch_size], self.labels[start:start + batch_size]
