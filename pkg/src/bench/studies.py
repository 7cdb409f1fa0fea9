"""Per-seed analysis studies stored next to the metrics records."""
from typing import Sequence

import numpy as np

from ..adapt.episodes import idempotence_errors
from ..constants.status import LossNorm, MethodName
from ..dualnet.model import DualInputModel, predict_y0
from ..states.records import MetricsRecord, StudyRecord
from ..training.trainer import task_error
from .summary import spearman

IDEMPOTENCE_GAP = "idempotence_gap"
UNCERTAINTY_CORRELATION = "uncertainty_correlation"
STREAM_COMPARISON = "stream_comparison"
NAIVE_PROBE = "naive_probe"

# desk-scale floor for the rank correlation between d and the absolute error
UNCERTAINTY_FLOOR = 0.3


def idempotence_gap_study(
    model: DualInputModel,
    clean_x: np.ndarray,
    shifted_x: np.ndarray,
    seed: int,
    norm: LossNorm = LossNorm.L2
) -> StudyRecord:
    """Mean d on clean test inputs against mean d at the most severe level."""
    clean = float(np.mean(idempotence_errors(model, None, clean_x, norm)))
    shifted = float(np.mean(idempotence_errors(model, None, shifted_x, norm)))
    return StudyRecord(
        study=IDEMPOTENCE_GAP,
        seed=seed,
        metrics={"clean_d": clean, "shifted_d": shifted, "gap": shifted - clean},
        passed=clean < shifted
    )


def per_sample_abs_error(model: DualInputModel, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    prediction = model.readout_value(predict_y0(model, x))
    return np.mean(np.abs(prediction - y), axis=1)


def uncertainty_study(
    model: DualInputModel,
    xs: Sequence[np.ndarray],
    ys: Sequence[np.ndarray],
    seed: int,
    norm: LossNorm = LossNorm.L2
) -> StudyRecord:
    """Spearman between per-sample d and per-sample absolute error, pooled over all inputs."""
    d = np.concatenate([idempotence_errors(model, None, x, norm) for x in xs])
    errors = np.concatenate([per_sample_abs_error(model, x, y) for x, y in zip(xs, ys)])
    rho = spearman(d, errors)
    return StudyRecord(
        study=UNCERTAINTY_CORRELATION,
        seed=seed,
        metrics={"spearman": rho, "samples": float(len(d))},
        passed=rho > UNCERTAINTY_FLOOR
    )


def stream_comparison_study(
    model: DualInputModel,
    labels: np.ndarray,
    online: np.ndarray,
    offline: np.ndarray,
    base: np.ndarray,
    seed: int,
    batch_size: int
) -> StudyRecord:
    """Cumulative task error of online against offline adaptation on one stream."""
    online_error = task_error(model, online, labels)
    offline_error = task_error(model, offline, labels)
    return StudyRecord(
        study=STREAM_COMPARISON,
        seed=seed,
        metrics={
            "online_error": online_error,
            "offline_error": offline_error,
            "base_error": task_error(model, base, labels),
            "items": float(len(labels)),
            "batch_size": float(batch_size)
        },
        passed=online_error < offline_error
    )


def naive_probe_study(records: Sequence[MetricsRecord], seed: int) -> StudyRecord:
    """
    Identity-collapse gap and error magnification of the naive ablation,
    keyed by batch size and level. Magnification is the naive task error
    over the base task error of the same cell.
    """
    base = {
        (r.batch_size, r.level): r.task_error
        for r in records
        if r.method == MethodName.BASE.value and r.ok
    }
    metrics = {}
    for r in records:
        if r.method != MethodName.IT3_NAIVE.value or not r.ok:
            continue
        key = f"bs{r.batch_size}_level{r.level}"
        metrics[f"{key}_probe_identity_gap"] = r.probe_identity_gap
        reference = base.get((r.batch_size, r.level))
        metrics[f"{key}_error_magnification"] = (
            r.task_error / reference if reference else None
        )
    return StudyRecord(study=NAIVE_PROBE, seed=seed, metrics=metrics)
