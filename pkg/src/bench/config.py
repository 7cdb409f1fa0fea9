import json
from pathlib import Path
from typing import List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError as PydanticValidationError, model_validator

from ..adapt.episodes import TTTConfig
from ..constants.status import CorruptionKind, MethodName
from ..dualnet.model import ModelSpec
from ..exceptions.handler import ConfigError
from ..ood.corruptions import CorruptionSpec, make_levels
from ..ood.stream import StreamSchedule
from ..training.trainer import TrainConfig
from ..utils.logging import get_logger
from ..utils.seeding import derive_seed
from .datasets import CsvSource, SyntheticSpec

logger = get_logger("bench.config")


def _check_increasing(severities: List[float]) -> None:
    if any(not later > earlier for earlier, later in zip(severities, severities[1:])):
        raise ValueError(f"severities must be strictly increasing, got {severities}")


def _check_severity_range(kind: CorruptionKind, severities: List[float]) -> None:
    if kind == CorruptionKind.FEATURE_ZEROING and any(not 0.0 <= s <= 1.0 for s in severities):
        raise ValueError(f"feature_zeroing severities are probabilities in [0, 1], got {severities}")
    if kind == CorruptionKind.GAUSSIAN_NOISE and any(s < 0.0 for s in severities):
        raise ValueError(f"gaussian_noise severities must be >= 0, got {severities}")


class LevelsSpec(BaseModel):
    """
    OOD levels of the evaluation grid.

    Severity kinds give one level per severity. label_range_holdout gives a
    single level whose shift comes from re-splitting on labels in [lo, hi].
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: CorruptionKind = CorruptionKind.FEATURE_ZEROING
    severities: List[float] = Field(default_factory=lambda: [0.05, 0.10, 0.15, 0.20])
    lo: Optional[float] = None
    hi: Optional[float] = None

    @model_validator(mode="after")
    def _check_holdout(self) -> "LevelsSpec":
        if self.kind == CorruptionKind.LABEL_RANGE_HOLDOUT and (self.lo is None or self.hi is None):
            raise ValueError("label_range_holdout levels need lo and hi")
        _check_increasing(self.severities)
        _check_severity_range(self.kind, self.severities)
        return self

    @property
    def is_holdout(self) -> bool:
        return self.kind == CorruptionKind.LABEL_RANGE_HOLDOUT

    def build(self, seed: int) -> List[CorruptionSpec]:
        if self.is_holdout:
            return [CorruptionSpec(kind=self.kind, lo=self.lo, hi=self.hi, seed=derive_seed(seed, "level", 0))]
        return make_levels(self.kind, self.severities, base_seed=seed)


class StreamSpec(BaseModel):
    """Online stream; without `severities` the grid's levels are reused."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: CorruptionKind = CorruptionKind.FEATURE_ZEROING
    severities: Optional[List[float]] = None
    items_per_level: Optional[int] = Field(default=None, ge=1)
    interpolate: bool = True

    @model_validator(mode="after")
    def _check_severities(self) -> "StreamSpec":
        if self.severities is not None:
            _check_increasing(self.severities)
            _check_severity_range(self.kind, self.severities)
        return self


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    dataset: Union[CsvSource, SyntheticSpec] = Field(default_factory=SyntheticSpec, discriminator="kind")
    model: ModelSpec = Field(default_factory=ModelSpec)
    train: TrainConfig = Field(default_factory=TrainConfig)
    ttt: TTTConfig = Field(default_factory=TTTConfig)
    levels: LevelsSpec = Field(default_factory=LevelsSpec)
    methods: List[MethodName] = Field(min_length=1)
    seeds: List[int] = Field(min_length=1)
    output_path: str = "results"
    batch_sizes: List[int] = Field(default_factory=lambda: [32], min_length=1)
    stream: Optional[StreamSpec] = None
    studies: bool = True
    workers: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check_consistency(self) -> "ExperimentConfig":
        if any(size < 1 for size in self.batch_sizes):
            raise ValueError("batch_sizes must be positive")
        if len(set(self.batch_sizes)) != len(self.batch_sizes):
            raise ValueError("batch_sizes must be distinct")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError("methods must be distinct")
        if self.dataset.task != self.model.task:
            raise ValueError(f"dataset task '{self.dataset.task.value}' does not match model task '{self.model.task.value}'")
        if self.stream is not None and self.stream.kind == CorruptionKind.LABEL_RANGE_HOLDOUT:
            raise ValueError("streams need a severity-based corruption kind")
        if (
            MethodName.IT3_ONLINE in self.methods
            and self.levels.is_holdout
            and (self.stream is None or self.stream.severities is None)
        ):
            raise ValueError("label_range_holdout grids with it3_online need stream.severities")
        return self

    def with_seeds(self, seeds: List[int]) -> "ExperimentConfig":
        return self.model_copy(update={"seeds": list(seeds)})

    def stream_schedule(self, seed: int, test_size: int) -> StreamSchedule:
        """Stream for one seed; defaults to the grid's levels spread over the test split."""
        stream = self.stream or StreamSpec(kind=self.levels.kind)
        if stream.severities is not None:
            severities = stream.severities
        elif self.levels.is_holdout:
            raise ConfigError("label_range_holdout grids need an explicit stream")
        else:
            severities = self.levels.severities
        levels = make_levels(stream.kind, severities, base_seed=derive_seed(seed, "stream"))
        items = stream.items_per_level or max(1, test_size // max(1, len(levels)))
        return StreamSchedule(levels=levels, items_per_level=items, interpolate=stream.interpolate)


def parse_experiment_config(data: dict, file_path: Optional[str] = None) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except PydanticValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(part) for part in error['loc']) or '<root>'}: {error['msg']}"
            for error in e.errors()
        )
        raise ConfigError(f"Invalid experiment config: {problems}", file_path) from e


def load_experiment_config(path: Union[str, Path], seed_override: Optional[int] = None) -> ExperimentConfig:
    """
    Read an experiment config JSON document.

    Args:
        path: Config file
        seed_override: When given (ITTT_SEED), replaces the seed list with [seed]

    Raises:
        ConfigError: missing file, malformed JSON or invalid fields
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ConfigError(f"Config file '{path}' does not exist", str(path)) from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Malformed JSON at line {e.lineno}: {e.msg}", str(path)) from e
    except OSError as e:
        raise ConfigError(f"Cannot read config: {e}", str(path)) from e

    if not isinstance(data, dict):
        raise ConfigError("Config must be a JSON object", str(path))

    cfg = parse_experiment_config(data, str(path))
    if seed_override is not None:
        logger.info(f"Seed override {seed_override} replaces config seeds {cfg.seeds}")
        cfg = cfg.with_seeds([seed_override])
    return cfg
