from pathlib import Path
from typing import List, Literal, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..constants.status import SyntheticFn, TaskKind
from ..exceptions.handler import DatasetError
from ..states.dataset import Dataset, Standardization
from ..utils.logging import get_logger
from ..utils.seeding import derive_seed
from ..utils.validation import validate_file_exists

logger = get_logger("bench.datasets")


class CsvSource(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["csv"] = "csv"
    path: str
    label_columns: Optional[List[str]] = None
    task: TaskKind = TaskKind.REGRESSION
    test_fraction: float = Field(default=0.2, ge=0, lt=1)


class SyntheticSpec(BaseModel):
    """
    Synthetic regression/classification data with features uniform in [0, 1]^d.

    With `latent_dim` set, only the first latent_dim columns are drawn
    independently; the remaining columns are fixed convex mixtures of them
    plus `feature_noise`, and the target reads the latent columns. Zeroing
    one column then leaves the feature manifold instead of landing on
    another plausible row.

    `seed` pins the generated data; when absent the experiment seed is used.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["synthetic"] = "synthetic"
    fn: SyntheticFn = SyntheticFn.FRIEDMAN
    n: int = Field(default=2000, ge=10)
    input_dim: int = Field(default=10, ge=1)
    noise_sigma: float = Field(default=1.0, ge=0)
    latent_dim: Optional[int] = Field(default=None, ge=1)
    feature_noise: float = Field(default=0.05, ge=0)
    seed: Optional[int] = None
    coefficients: Optional[List[float]] = None
    classes: int = Field(default=3, ge=2)
    cluster_std: float = Field(default=0.15, gt=0)
    test_fraction: float = Field(default=0.2, ge=0, lt=1)

    @model_validator(mode="after")
    def _check_shape(self) -> "SyntheticSpec":
        if self.latent_dim is not None and self.latent_dim > self.input_dim:
            raise ValueError("latent_dim must not exceed input_dim")
        if self.fn == SyntheticFn.FRIEDMAN and self.source_dim < 5:
            raise ValueError("friedman needs at least 5 independent features")
        if self.coefficients is not None and len(self.coefficients) != self.source_dim:
            raise ValueError("coefficients must have one entry per independent feature")
        return self

    @property
    def source_dim(self) -> int:
        """Number of independently drawn feature columns."""
        return self.latent_dim if self.latent_dim is not None else self.input_dim

    @property
    def task(self) -> TaskKind:
        return TaskKind.CLASSIFICATION if self.fn == SyntheticFn.BLOBS else TaskKind.REGRESSION


DatasetSource = Union[CsvSource, SyntheticSpec]


def prepare_dataset(
    features: np.ndarray,
    labels: np.ndarray,
    task: TaskKind = TaskKind.REGRESSION,
    split_seed: int = 0,
    test_fraction: float = 0.2,
    feature_names: Optional[Sequence[str]] = None,
    label_names: Optional[Sequence[str]] = None,
    name: str = "dataset"
) -> Dataset:
    """
    Split by seeded permutation and standardize with train-split statistics.

    Features that are constant on the train split are dropped with a warning.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if labels.ndim == 1:
        labels = labels.reshape(-1, 1)
    n = len(features)
    if n < 2:
        raise DatasetError("Dataset needs at least 2 rows", details={"rows": n})
    if not (np.all(np.isfinite(features)) and np.all(np.isfinite(labels))):
        raise DatasetError("Dataset contains NaN or infinite values")

    feature_names = list(feature_names) if feature_names is not None else [f"x{i}" for i in range(features.shape[1])]
    label_names = list(label_names) if label_names is not None else [f"y{i}" for i in range(labels.shape[1])]

    order = np.random.default_rng(split_seed).permutation(n)
    n_test = min(int(round(n * test_fraction)), n - 1)
    test_index = np.sort(order[:n_test])
    train_index = np.sort(order[n_test:])

    mean = features[train_index].mean(axis=0)
    std = features[train_index].std(axis=0)
    keep = std > 0
    if not np.all(keep):
        dropped = [feature_names[i] for i in np.flatnonzero(~keep)]
        logger.warning(f"Dropping constant feature(s): {', '.join(dropped)}")
        if not np.any(keep):
            raise DatasetError("Every feature is constant on the train split")
        features = features[:, keep]
        feature_names = [name_ for name_, kept in zip(feature_names, keep) if kept]
        mean, std = mean[keep], std[keep]
    feature_stats = Standardization(mean=mean, std=std)

    label_stats = None
    if task == TaskKind.REGRESSION:
        label_std = labels[train_index].std(axis=0)
        label_stats = Standardization(
            mean=labels[train_index].mean(axis=0),
            std=np.where(label_std > 0, label_std, 1.0)
        )
        labels = label_stats.apply(labels)

    return Dataset(
        features=feature_stats.apply(features),
        labels=labels,
        train_index=train_index,
        test_index=test_index,
        feature_stats=feature_stats,
        label_stats=label_stats,
        task=task,
        feature_names=feature_names,
        label_names=label_names,
        name=name
    )


def load_csv(
    path: Union[str, Path],
    label_columns: Optional[Sequence[str]] = None,
    split_seed: int = 0,
    test_fraction: float = 0.2,
    task: TaskKind = TaskKind.REGRESSION
) -> Dataset:
    """
    Load a numeric CSV with a header row.

    Args:
        path: CSV file
        label_columns: Label column names; defaults to the last column
        split_seed: Seed of the train/test permutation
        test_fraction: Share of rows held out for testing
        task: regression or classification (one-hot label columns)

    Returns:
        Standardized Dataset

    Raises:
        FileOperationError: missing file
        DatasetError: no data rows, unknown label column, non-numeric cell
    """
    path = validate_file_exists(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError as e:
        raise DatasetError("no data rows", file_path=str(path)) from e
    except (OSError, pd.errors.ParserError) as e:
        raise DatasetError(f"Cannot parse CSV: {e}", file_path=str(path)) from e

    if frame.empty:
        raise DatasetError("no data rows", file_path=str(path))

    columns = [str(c) for c in frame.columns]
    labels = list(label_columns) if label_columns else [columns[-1]]
    for column in labels:
        if column not in columns:
            raise DatasetError(f"Unknown label column '{column}'", file_path=str(path), column=column)
    feature_columns = [c for c in columns if c not in labels]
    if not feature_columns:
        raise DatasetError("CSV has no feature columns", file_path=str(path))

    numeric = frame.apply(pd.to_numeric, errors="coerce")
    bad = numeric.isna().to_numpy()
    if bad.any():
        row, col = (int(v) for v in np.argwhere(bad)[0])
        # +2: one for the header line, one for 1-based numbering
        raise DatasetError(
            f"Non-numeric cell '{frame.iat[row, col]}' at row {row + 2}, column '{columns[col]}'",
            file_path=str(path),
            row=row + 2,
            column=columns[col]
        )

    return prepare_dataset(
        numeric[feature_columns].to_numpy(dtype=np.float64),
        numeric[labels].to_numpy(dtype=np.float64),
        task=task,
        split_seed=split_seed,
        test_fraction=test_fraction,
        feature_names=feature_columns,
        label_names=labels,
        name=path.stem
    )


def friedman(x: np.ndarray) -> np.ndarray:
    """10·sin(π·x1·x2) + 20·(x3 − 0.5)² + 10·x4 + 5·x5 on the first five features."""
    return (
        10.0 * np.sin(np.pi * x[:, 0] * x[:, 1])
        + 20.0 * (x[:, 2] - 0.5) ** 2
        + 10.0 * x[:, 3]
        + 5.0 * x[:, 4]
    )


def _mix_features(spec: SyntheticSpec, source: np.ndarray, seed: int) -> np.ndarray:
    extra = spec.input_dim - spec.source_dim
    if extra == 0:
        return source
    weights = np.random.default_rng(derive_seed(seed, "mixing")).random((spec.source_dim, extra))
    weights /= weights.sum(axis=0, keepdims=True)
    mixed = source @ weights
    if spec.feature_noise > 0:
        noise_rng = np.random.default_rng(derive_seed(seed, "feature-noise"))
        mixed = mixed + spec.feature_noise * noise_rng.standard_normal(mixed.shape)
    return np.hstack([source, mixed])


def synth_raw(spec: SyntheticSpec, seed: int) -> tuple:
    """Unstandardized (features, labels) for a synthetic spec."""
    rng = np.random.default_rng(derive_seed(seed, "features"))
    noise_rng = np.random.default_rng(derive_seed(seed, "noise"))

    if spec.fn == SyntheticFn.BLOBS:
        centers = np.random.default_rng(derive_seed(seed, "centers")).random((spec.classes, spec.input_dim))
        classes = rng.integers(0, spec.classes, size=spec.n)
        x = centers[classes] + spec.cluster_std * noise_rng.standard_normal((spec.n, spec.input_dim))
        return x, np.eye(spec.classes)[classes]

    source = rng.random((spec.n, spec.source_dim))
    x = _mix_features(spec, source, seed)
    if spec.fn == SyntheticFn.LINEAR:
        coefficients = (
            np.asarray(spec.coefficients, dtype=np.float64)
            if spec.coefficients is not None
            else np.random.default_rng(derive_seed(seed, "coefficients")).standard_normal(spec.source_dim)
        )
        clean = source @ coefficients
    else:
        clean = friedman(source)
    y = clean + spec.noise_sigma * noise_rng.standard_normal(spec.n) if spec.noise_sigma > 0 else clean
    return x, y.reshape(-1, 1)


def synth_dataset(spec: SyntheticSpec, seed: Optional[int] = None, split_seed: Optional[int] = None) -> Dataset:
    """
    Generate and standardize a synthetic dataset.

    The data seed is spec.seed, else `seed`, else 0; the split seed
    defaults to one derived from the data seed.
    """
    data_seed = spec.seed if spec.seed is not None else (seed if seed is not None else 0)
    x, y = synth_raw(spec, data_seed)
    return prepare_dataset(
        x,
        y,
        task=spec.task,
        split_seed=split_seed if split_seed is not None else derive_seed(data_seed, "split"),
        test_fraction=spec.test_fraction,
        name=f"{spec.fn.value}-{spec.n}"
    )


def build_dataset(source: DatasetSource, seed: int) -> Dataset:
    """Dataset for one experiment seed (data and split seeds derived from it)."""
    if isinstance(source, CsvSource):
        return load_csv(
            source.path,
            source.label_columns,
            split_seed=derive_seed(seed, "split"),
            test_fraction=source.test_fraction,
            task=source.task
        )
    return synth_dataset(source, seed=derive_seed(seed, "data"), split_seed=derive_seed(seed, "split"))
