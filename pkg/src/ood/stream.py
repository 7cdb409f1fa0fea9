from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..exceptions.handler import ContractError
from ..states.dataset import Dataset
from ..utils.seeding import derive_seed
from .corruptions import CorruptionSpec, corrupt


class StreamSchedule(BaseModel):
    """Levels in ascending severity, each contributing items_per_level samples."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    levels: List[CorruptionSpec]
    items_per_level: int = Field(default=100, ge=1)
    interpolate: bool = True

    @property
    def total_items(self) -> int:
        return len(self.levels) * self.items_per_level


@dataclass(frozen=True, eq=False)
class StreamItem:
    x: np.ndarray
    y: np.ndarray
    level: int
    severity: float


def item_severity(schedule: StreamSchedule, t: int) -> float:
    """
    Severity applied to item t.

    Without interpolation it is the level's own severity. With it, the
    severity is piecewise linear through knots placed at t_i = i·(N−1)/(L−1)
    for the L levels over N items; a single level ramps from 0 to its
    severity.
    """
    levels = schedule.levels
    m = schedule.items_per_level
    if not schedule.interpolate:
        return levels[t // m].severity

    n = schedule.total_items
    if n == 1:
        return levels[0].severity
    if len(levels) == 1:
        return levels[0].severity * t / (n - 1)

    knots = np.arange(len(levels)) * (n - 1) / (len(levels) - 1)
    return float(np.interp(t, knots, [level.severity for level in levels]))


def stream(schedule: StreamSchedule, dataset: Dataset) -> List[StreamItem]:
    """
    Ordered corrupted stream over the dataset rows (wrapping when needed).

    Item t belongs to level t // items_per_level and is corrupted with its
    own seed derived from the level seed and t.
    """
    if len(dataset) == 0:
        raise ContractError("stream needs a non-empty dataset")

    items = []
    for t in range(schedule.total_items):
        level = t // schedule.items_per_level
        spec = schedule.levels[level]
        severity = item_severity(schedule, t)
        row = t % len(dataset)
        x = corrupt(
            spec.with_severity(severity),
            dataset.features[row],
            np.random.default_rng(derive_seed(spec.seed, t))
        )
        items.append(StreamItem(x=x, y=dataset.labels[row].copy(), level=level, severity=severity))
    return items


def stream_arrays(items: List[StreamItem]) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(x [N×d], y [N×l], level [N], severity [N]) stacked from stream items."""
    if not items:
        return np.empty((0, 0)), np.empty((0, 0)), np.empty(0, dtype=np.int64), np.empty(0)
    return (
        np.stack([item.x for item in items]),
        np.stack([item.y for item in items]),
        np.array([item.level for item in items], dtype=np.int64),
        np.array([item.severity for item in items])
    )
