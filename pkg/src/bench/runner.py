"""
Experiment grid runner.

One cell per seed: build the dataset, fit on the clean train split, then
evaluate every (method, batch size, level) over the corrupted test split.
Offline-style methods run one episode per batch and must leave the model
bitwise equal to its post-fit snapshot; it3_online consumes the stream
schedule on its own copy of the model.
"""
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..adapt.anchor import AnchorState, make_frozen_anchor
from ..adapt.counters import PassCounter
from ..adapt.episodes import OnlineAdapter, ttt_episode_naive, ttt_episode_offline
from ..baselines.actmad import ActivationStats, actmad_episode, base_predict, collect_stats
from ..config import settings
from ..constants.status import CellStatus, MethodName, TTTMode
from ..diffcore import row_distance
from ..diffcore.params import ParamSnapshot
from ..dualnet.model import DualInputModel, neutral_from_spec
from ..dualnet.serialization import load_weights
from ..exceptions.handler import ContractError, create_error_response
from ..ood.corruptions import CorruptionSpec, corrupt, holdout_split
from ..ood.stream import StreamSchedule, stream, stream_arrays
from ..states.dataset import Dataset
from ..states.records import MetricsRecord, StudyRecord
from ..training.trainer import TrainReport, fit, task_error
from ..utils.concurrent import run_cells
from ..utils.logging import get_logger, log_execution_time
from ..utils.seeding import derive_seed, make_rng
from .config import ExperimentConfig
from .datasets import build_dataset
from .studies import (
    idempotence_gap_study,
    naive_probe_study,
    stream_comparison_study,
    uncertainty_study
)

logger = get_logger("bench.runner")

BATCH_METHODS = (
    MethodName.BASE,
    MethodName.IT3_OFFLINE,
    MethodName.IT3_NAIVE,
    MethodName.ACTMAD_LITE
)


@dataclass
class SeedResult:
    seed: int
    records: List[MetricsRecord] = field(default_factory=list)
    studies: List[StudyRecord] = field(default_factory=list)


@dataclass
class ExperimentResult:
    records: List[MetricsRecord] = field(default_factory=list)
    studies: List[StudyRecord] = field(default_factory=list)

    @property
    def aborted_cells(self) -> int:
        return sum(1 for record in self.records if record.status == CellStatus.ABORTED)


@dataclass
class _Tally:
    passes: PassCounter = field(default_factory=PassCounter)
    wall_seconds: float = 0.0
    episodes: int = 0
    aborted: int = 0
    d_sum: float = 0.0
    rows: int = 0
    probe_gaps: List[float] = field(default_factory=list)

    def add_d(self, d: float, rows: int) -> None:
        self.d_sum += d * rows
        self.rows += rows

    @property
    def mean_d(self) -> Optional[float]:
        return self.d_sum / self.rows if self.rows else None


@dataclass
class _SeedContext:
    cfg: ExperimentConfig
    seed: int
    dataset: Dataset
    model: DualInputModel
    post_fit: ParamSnapshot
    anchor: AnchorState
    levels: List[CorruptionSpec]
    level_inputs: List[np.ndarray]
    stats: Optional[ActivationStats] = None


def batch_bounds(n: int, batch_size: int, min_last: int = 1) -> List[Tuple[int, int]]:
    """Consecutive [start, end) batches; a trailing batch shorter than min_last joins the previous one."""
    bounds = [(start, min(start + batch_size, n)) for start in range(0, n, batch_size)]
    if len(bounds) > 1 and bounds[-1][1] - bounds[-1][0] < min_last:
        last = bounds.pop()
        bounds[-1] = (bounds[-1][0], last[1])
    return bounds


def _severity(spec: CorruptionSpec) -> float:
    return spec.severity if spec.lo is None else 0.0


def _record(method: str, level: int, seed: int, batch_size: int, severity: float, tally: _Tally, error: float) -> MetricsRecord:
    return MetricsRecord(
        method=method,
        level=level,
        seed=seed,
        task_error=error,
        mean_idempotence_error=tally.mean_d,
        episodes=tally.episodes,
        forward_passes=tally.passes.forward,
        backward_passes=tally.passes.backward,
        wall_time_ms=tally.wall_seconds * 1000.0,
        batch_size=batch_size,
        severity=severity,
        diagnostic_passes=tally.passes.diagnostic,
        aborted_episodes=tally.aborted,
        probe_identity_gap=float(np.mean(tally.probe_gaps)) if tally.probe_gaps else None
    )


def _flagged(method: str, level: int, seed: int, batch_size: int, severity: float, error: Exception) -> MetricsRecord:
    return MetricsRecord(
        method=method,
        level=level,
        seed=seed,
        batch_size=batch_size,
        severity=severity,
        status=CellStatus.ABORTED,
        error=create_error_response(error)
    )


def planned_cells(cfg: ExperimentConfig) -> List[Tuple[MethodName, int, int, float]]:
    """(method, batch size, level, severity) for every record a seed should produce."""
    grid_levels = [0.0] if cfg.levels.is_holdout else list(cfg.levels.severities)
    stream_levels = (cfg.stream.severities if cfg.stream and cfg.stream.severities is not None else grid_levels)
    cells = []
    for method in cfg.methods:
        for batch_size in cfg.batch_sizes:
            if method == MethodName.ACTMAD_LITE and batch_size == 1:
                continue
            severities = stream_levels if method == MethodName.IT3_ONLINE else grid_levels
            for level, severity in enumerate(severities):
                cells.append((method, batch_size, level, float(severity)))
    return cells


def _check_isolation(ctx: _SeedContext) -> None:
    if not ctx.post_fit.matches(ctx.model.params):
        raise ContractError(
            "Episode isolation violated: parameters differ from the post-fit snapshot",
            {"seed": ctx.seed}
        )


def _evaluate_batches(ctx: _SeedContext, method: MethodName, batch_size: int, level: int) -> MetricsRecord:
    cfg = ctx.cfg
    model = ctx.model
    x_level = ctx.level_inputs[level]
    y_level = ctx.dataset.labels
    norm = cfg.ttt.loss_norm
    offline_cfg = cfg.ttt.for_mode(TTTMode.OFFLINE)
    naive_cfg = cfg.ttt.for_mode(TTTMode.NAIVE)

    tally = _Tally()
    predictions = np.empty_like(y_level)
    min_last = 2 if method == MethodName.ACTMAD_LITE else 1

    for start, end in batch_bounds(len(x_level), batch_size, min_last):
        x = x_level[start:end]
        began = time.perf_counter()
        if method == MethodName.BASE:
            prediction = base_predict(model, x)
            y1 = model.forward(x, model.readout_value(prediction)).value
            elapsed = time.perf_counter() - began
            tally.passes += PassCounter(forward=1, diagnostic=1)
            tally.add_d(float(np.mean(row_distance(model.readout_value(y1), model.readout_value(prediction), norm))), end - start)
        else:
            if method == MethodName.IT3_OFFLINE:
                pair, report = ttt_episode_offline(model, ctx.anchor, x, offline_cfg)
                prediction = pair.y0
            elif method == MethodName.IT3_NAIVE:
                probe_rng = make_rng(ctx.seed, "probe", batch_size, level, start)
                pair, report = ttt_episode_naive(model, x, naive_cfg, probe_rng=probe_rng)
                prediction = pair.y0
                if report.probe_identity_gap is not None:
                    tally.probe_gaps.append(report.probe_identity_gap)
            else:
                prediction, report = actmad_episode(model, ctx.stats, x, cfg.ttt)
            elapsed = time.perf_counter() - began
            tally.passes += report.passes
            tally.aborted += int(report.aborted)
            tally.add_d(report.idempotence_error, end - start)

        tally.wall_seconds += elapsed
        tally.episodes += 1
        predictions[start:end] = prediction
        _check_isolation(ctx)

    return _record(
        method.value, level, ctx.seed, batch_size, _severity(ctx.levels[level]), tally,
        task_error(model, predictions, y_level)
    )


def _run_stream(ctx: _SeedContext, schedule: StreamSchedule, batch_size: int):
    """Online adaptation over the stream; per-level records plus the raw predictions."""
    x_all, y_all, level_of, _ = stream_arrays(stream(schedule, ctx.dataset))
    adapter = OnlineAdapter(ctx.model.clone(), ctx.cfg.ttt.for_mode(TTTMode.ONLINE))
    predictions = np.empty_like(y_all)
    d_rows = np.empty(len(y_all))
    tallies: Dict[int, _Tally] = {}

    for start, end in batch_bounds(len(x_all), batch_size):
        began = time.perf_counter()
        pair, report = adapter.step(x_all[start:end])
        elapsed = time.perf_counter() - began
        tally = tallies.setdefault(int(level_of[start]), _Tally())
        tally.passes += report.passes
        tally.wall_seconds += elapsed
        tally.episodes += 1
        tally.aborted += int(report.aborted)
        predictions[start:end] = pair.y0
        d_rows[start:end] = report.idempotence_error

    records = []
    for level, spec in enumerate(schedule.levels):
        rows = level_of == level
        tally = tallies.get(level, _Tally())
        tally.d_sum, tally.rows = float(d_rows[rows].sum()), int(rows.sum())
        records.append(_record(
            MethodName.IT3_ONLINE.value, level, ctx.seed, batch_size, spec.severity, tally,
            task_error(ctx.model, predictions[rows], y_all[rows])
        ))
    return records, x_all, y_all, predictions


def _offline_over_stream(ctx: _SeedContext, x_all: np.ndarray, batch_size: int) -> Tuple[np.ndarray, np.ndarray]:
    offline_cfg = ctx.cfg.ttt.for_mode(TTTMode.OFFLINE)
    offline = np.empty((len(x_all), ctx.model.label_dim))
    for start, end in batch_bounds(len(x_all), batch_size):
        pair, _ = ttt_episode_offline(ctx.model, ctx.anchor, x_all[start:end], offline_cfg)
        offline[start:end] = pair.y0
    _check_isolation(ctx)
    return offline, base_predict(ctx.model, x_all)


def seed_data(cfg: ExperimentConfig, seed: int) -> Tuple[Dataset, List[CorruptionSpec]]:
    """The seed's dataset (re-split for label-range holdout grids) and its OOD levels."""
    dataset = build_dataset(cfg.dataset, seed)
    levels = cfg.levels.build(derive_seed(seed, "levels"))
    if cfg.levels.is_holdout:
        dataset = holdout_split(dataset, levels[0].lo, levels[0].hi)
    return dataset, levels


def train_seed(cfg: ExperimentConfig, seed: int, dataset: Optional[Dataset] = None) -> Tuple[DualInputModel, TrainReport]:
    """Initialize and fit the seed's model on the clean train split."""
    if dataset is None:
        dataset, _ = seed_data(cfg, seed)
    train = dataset.train()
    model = DualInputModel.from_spec(cfg.model, dataset.input_dim, dataset.label_dim, seed=derive_seed(seed, "init"))
    train_cfg = cfg.train.model_copy(update={
        "shuffle_seed": derive_seed(seed, "shuffle"),
        "batch_size": min(cfg.train.batch_size, len(train))
    })
    report = fit(model, train, train_cfg)
    logger.info(f"seed {seed}: trained {report.epochs_run} epoch(s), final loss {report.final_loss}")
    return model, report


def _load_pretrained(cfg: ExperimentConfig, dataset: Dataset, weights: str) -> DualInputModel:
    model = load_weights(weights, neutral=neutral_from_spec(cfg.model, dataset.label_dim))
    model.elu_alpha = cfg.model.elu_alpha
    expected = DualInputModel.from_spec(cfg.model, dataset.input_dim, dataset.label_dim)
    if not model.same_architecture(expected):
        raise ContractError(
            "Weights do not match the configured model and dataset",
            {"weights": model.layer_widths, "config": expected.layer_widths}
        )
    return model


def _prepare(cfg: ExperimentConfig, seed: int, weights: Optional[str] = None) -> _SeedContext:
    dataset, levels = seed_data(cfg, seed)
    train, test = dataset.train(), dataset.test()
    if weights is None:
        model, _ = train_seed(cfg, seed, dataset)
    else:
        model = _load_pretrained(cfg, dataset, weights)
        logger.info(f"seed {seed}: adapting pretrained weights from {weights}")

    ctx = _SeedContext(
        cfg=cfg,
        seed=seed,
        dataset=test,
        model=model,
        post_fit=model.params.snapshot(),
        anchor=make_frozen_anchor(model),
        levels=levels,
        level_inputs=[corrupt(spec, test.features) for spec in levels]
    )
    if MethodName.ACTMAD_LITE in cfg.methods:
        ctx.stats = collect_stats(model, train)
    return ctx


def _safe(method: MethodName, batch_size: int, level: int, seed: int, severity: float, fn) -> List[MetricsRecord]:
    try:
        result = fn()
        return result if isinstance(result, list) else [result]
    except Exception as e:
        logger.warning(f"seed {seed}: {method.value}@bs{batch_size} level {level} aborted: {e}")
        return [_flagged(method.value, level, seed, batch_size, severity, e)]


def run_seed(cfg: ExperimentConfig, seed: int, weights: Optional[str] = None) -> SeedResult:
    """Every record (and study) of one seed; failures flag cells instead of raising."""
    result = SeedResult(seed=seed)
    cells = planned_cells(cfg)

    try:
        ctx = _prepare(cfg, seed, weights)
    except Exception as e:
        logger.warning(f"seed {seed}: setup failed, flagging {len(cells)} cell(s): {e}")
        result.records = [_flagged(m.value, lvl, seed, bs, sev, e) for m, bs, lvl, sev in cells]
        return result

    for method, batch_size, level, severity in cells:
        if method in BATCH_METHODS:
            result.records += _safe(
                method, batch_size, level, seed, severity,
                lambda m=method, bs=batch_size, lvl=level: _evaluate_batches(ctx, m, bs, lvl)
            )

    for batch_size in cfg.batch_sizes:
        if MethodName.ACTMAD_LITE in cfg.methods and batch_size == 1:
            logger.warning(f"seed {seed}: actmad_lite skipped at batch size 1 (needs batch statistics)")

    stream_runs = {}
    if MethodName.IT3_ONLINE in cfg.methods:
        online_cells = [c for c in cells if c[0] == MethodName.IT3_ONLINE]
        for batch_size in cfg.batch_sizes:
            try:
                schedule = cfg.stream_schedule(seed, len(ctx.dataset))
                records, x_all, y_all, online = _run_stream(ctx, schedule, batch_size)
                result.records += records
                stream_runs[batch_size] = (x_all, y_all, online)
            except Exception as e:
                logger.warning(f"seed {seed}: it3_online@bs{batch_size} aborted: {e}")
                result.records += [
                    _flagged(m.value, lvl, seed, bs, sev, e)
                    for m, bs, lvl, sev in online_cells if bs == batch_size
                ]

    if cfg.studies:
        result.studies = _run_studies(ctx, result.records, stream_runs)

    logger.info(f"seed {seed}: {len(result.records)} record(s), {len(result.studies)} study record(s)")
    return result


def _run_studies(ctx: _SeedContext, records: List[MetricsRecord], stream_runs: dict) -> List[StudyRecord]:
    studies = []
    norm = ctx.cfg.ttt.loss_norm
    try:
        studies.append(idempotence_gap_study(ctx.model, ctx.dataset.features, ctx.level_inputs[-1], ctx.seed, norm))
        xs = [ctx.dataset.features, *ctx.level_inputs]
        studies.append(uncertainty_study(ctx.model, xs, [ctx.dataset.labels] * len(xs), ctx.seed, norm))
        if stream_runs:
            batch_size = ctx.cfg.batch_sizes[0]
            x_all, y_all, online = stream_runs.get(batch_size, next(iter(stream_runs.values())))
            offline, base = _offline_over_stream(ctx, x_all, batch_size)
            studies.append(stream_comparison_study(ctx.model, y_all, online, offline, base, ctx.seed, batch_size))
        if MethodName.IT3_NAIVE in ctx.cfg.methods:
            studies.append(naive_probe_study(records, ctx.seed))
    except Exception as e:
        logger.warning(f"seed {ctx.seed}: studies incomplete: {e}")
    return studies


@log_execution_time
def run_grid(cfg: ExperimentConfig, show_progress: bool = True, weights: Optional[str] = None) -> ExperimentResult:
    """
    Run every seed cell (threaded when workers > 1) and join the results in seed order.

    With `weights` the fit is skipped and every seed adapts the same pretrained model.
    """
    workers = cfg.workers or settings.workers
    seed_results = run_cells(
        [lambda s=seed: run_seed(cfg, s, weights) for seed in cfg.seeds],
        max_workers=workers,
        show_progress=show_progress
    )
    result = ExperimentResult()
    for seed_result in seed_results:
        result.records += seed_result.records
        result.studies += seed_result.studies
    if result.aborted_cells:
        logger.warning(f"{result.aborted_cells} aborted cell(s)")
    return result


def run_experiment(cfg: ExperimentConfig) -> List[MetricsRecord]:
    """One MetricsRecord per (method, batch size, level, seed)."""
    return run_grid(cfg).records
