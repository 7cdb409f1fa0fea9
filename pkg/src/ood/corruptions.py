from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from ..constants.status import CorruptionKind
from ..exceptions.handler import ContractError
from ..states.dataset import Dataset
from ..utils.logging import get_logger
from ..utils.seeding import derive_seed
from ..utils.validation import validate_strictly_increasing

logger = get_logger("ood.corruptions")


class CorruptionSpec(BaseModel):
    """
    One distribution shift.

    `severity` is the zeroing probability p for feature_zeroing and the
    noise scale σ for gaussian_noise. label_range_holdout uses `lo`/`hi`
    and shifts the split rather than the features.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: CorruptionKind
    severity: float = 0.0
    lo: Optional[float] = None
    hi: Optional[float] = None
    seed: int = 0

    @model_validator(mode="after")
    def _check_parameters(self) -> "CorruptionSpec":
        if self.kind == CorruptionKind.FEATURE_ZEROING and not 0.0 <= self.severity <= 1.0:
            raise ValueError(f"feature_zeroing probability must be in [0, 1], got {self.severity}")
        if self.kind == CorruptionKind.GAUSSIAN_NOISE and not self.severity >= 0.0:
            raise ValueError(f"gaussian_noise sigma must be >= 0, got {self.severity}")
        if self.kind == CorruptionKind.LABEL_RANGE_HOLDOUT:
            if self.lo is None or self.hi is None or not self.lo < self.hi:
                raise ValueError("label_range_holdout needs lo < hi")
        return self

    def with_severity(self, severity: float) -> "CorruptionSpec":
        return CorruptionSpec(kind=self.kind, severity=severity, lo=self.lo, hi=self.hi, seed=self.seed)


def corrupt(spec: CorruptionSpec, x: np.ndarray, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """
    Corrupted copy of a batch; the input is never mutated.

    Randomness comes from `rng` when given, otherwise from spec.seed, so the
    same spec and input always give the same output.
    """
    x = np.asarray(x, dtype=np.float64)
    rng = rng if rng is not None else np.random.default_rng(spec.seed)

    if spec.kind == CorruptionKind.FEATURE_ZEROING:
        out = x.copy()
        out[rng.random(x.shape) < spec.severity] = 0.0
        return out
    if spec.kind == CorruptionKind.GAUSSIAN_NOISE:
        return x + spec.severity * rng.standard_normal(x.shape)
    return x.copy()


def make_levels(kind: CorruptionKind, severities: Sequence[float], base_seed: int = 0) -> List[CorruptionSpec]:
    """One spec per severity, each with its own derived seed."""
    kind = CorruptionKind(kind)
    if kind == CorruptionKind.LABEL_RANGE_HOLDOUT:
        raise ContractError("label_range_holdout has no severity scale; use holdout_split", {"kind": kind.value})
    validate_strictly_increasing(list(severities), "severities")
    return [
        CorruptionSpec(kind=kind, severity=float(severity), seed=derive_seed(base_seed, "level", i))
        for i, severity in enumerate(severities)
    ]


def holdout_split(dataset: Dataset, lo: float, hi: float, column: int = 0) -> Dataset:
    """
    Re-split so training keeps labels within [lo, hi] and testing gets the rest.

    Bounds are in the dataset's label units (standardized for regression).
    """
    if not lo < hi:
        raise ContractError("holdout_split needs lo < hi", {"lo": lo, "hi": hi})
    values = dataset.labels[:, column]
    inside = (values >= lo) & (values <= hi)
    train_index = np.flatnonzero(inside)
    test_index = np.flatnonzero(~inside)
    if len(train_index) == 0 or len(test_index) == 0:
        raise ContractError(
            "holdout_split left one side empty",
            {"lo": lo, "hi": hi, "inside": len(train_index), "outside": len(test_index)}
        )
    logger.debug(f"holdout [{lo}, {hi}]: {len(train_index)} in range, {len(test_index)} outside")
    return dataset.with_split(train_index, test_index, f"{dataset.name}[holdout {lo}..{hi}]")
