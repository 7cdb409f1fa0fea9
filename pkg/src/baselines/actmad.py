"""
ActMAD-lite: test-time alignment of hidden activation statistics.

Each hidden layer's post-activation batch mean and variance are pulled
toward the statistics recorded on the training data with an L1 distance.
All parameters are updated, and the episode resets θ afterwards exactly
like an offline idempotent episode.
"""
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..diffcore import Node, add, backward, l1, make_optimizer, mean_rows, step, var_rows
from ..dualnet.model import DualInputModel, predict_y0
from ..adapt.counters import PassCounter
from ..adapt.episodes import EpisodeReport, TTTConfig, idempotence_errors
from ..exceptions.handler import ContractError, NumericError, UnsupportedBatchError
from ..states.dataset import Dataset
from ..utils.logging import get_logger

logger = get_logger("baselines.actmad")


@dataclass(frozen=True, eq=False)
class ActivationStats:
    layers: List[Tuple[np.ndarray, np.ndarray]]
    sample_count: int

    def __post_init__(self):
        if self.sample_count < 2:
            raise ContractError("ActivationStats need more than one sample", {"sample_count": self.sample_count})


def _hidden_activations(model: DualInputModel, x: np.ndarray) -> List[Node]:
    capture: List[Node] = []
    model.forward(x, model.neutral_like(x), capture=capture)
    return capture


def collect_stats(model: DualInputModel, dataset: Dataset, chunk_size: int = 256) -> ActivationStats:
    """
    Population mean and variance of every hidden layer over the dataset,
    with the neutral aux, merged chunk by chunk.
    """
    n_total = len(dataset)
    if n_total < 2:
        raise ContractError("collect_stats needs at least 2 samples", {"size": n_total})

    count = 0
    means: Optional[List[np.ndarray]] = None
    m2s: Optional[List[np.ndarray]] = None

    for x, _ in dataset.batches(chunk_size):
        layers = [node.value for node in _hidden_activations(model, x)]
        n_b = len(x)
        chunk_means = [h.mean(axis=0) for h in layers]
        chunk_m2s = [((h - mu) ** 2).sum(axis=0) for h, mu in zip(layers, chunk_means)]

        if means is None:
            means, m2s, count = chunk_means, chunk_m2s, n_b
            continue

        merged = count + n_b
        for i, (mu_b, m2_b) in enumerate(zip(chunk_means, chunk_m2s)):
            delta = mu_b - means[i]
            means[i] = means[i] + delta * (n_b / merged)
            m2s[i] = m2s[i] + m2_b + delta ** 2 * (count * n_b / merged)
        count = merged

    return ActivationStats(
        layers=[(mu, m2 / count) for mu, m2 in zip(means, m2s)],
        sample_count=count
    )


def alignment_loss(model: DualInputModel, stats: ActivationStats, x: np.ndarray) -> Node:
    """Σ over hidden layers of ‖μ_batch − μ_train‖₁ + ‖v_batch − v_train‖₁ (per-unit means)."""
    hidden = _hidden_activations(model, x)
    if len(hidden) != len(stats.layers):
        raise ContractError(
            "Activation statistics do not match the model depth",
            {"model_layers": len(hidden), "stats_layers": len(stats.layers)}
        )
    total = None
    for h, (mu, var) in zip(hidden, stats.layers):
        term = add(l1(mean_rows(h), mu), l1(var_rows(h), var))
        total = term if total is None else add(total, term)
    return total


def actmad_episode(
    model: DualInputModel,
    stats: ActivationStats,
    x: np.ndarray,
    cfg: TTTConfig
) -> Tuple[np.ndarray, EpisodeReport]:
    """
    k alignment steps on one batch, predict y0, reset θ.

    Raises:
        UnsupportedBatchError: for batches of fewer than two rows
    """
    x = np.asarray(x, dtype=np.float64)
    rows = len(x) if x.ndim == 2 else 1
    if rows < 2:
        raise UnsupportedBatchError("ActMAD-lite needs batch statistics (batch size >= 2)", batch_size=rows)
    if not model.hidden:
        raise ContractError("ActMAD-lite needs at least one hidden layer")

    snap = model.params.snapshot()
    opt = make_optimizer(cfg.optimizer, cfg.lr)
    report = EpisodeReport(passes=PassCounter())
    model.params.zero_grad()

    try:
        for i in range(cfg.steps):
            loss = alignment_loss(model, stats, x)
            report.passes.forward += 1
            value = float(loss.value)
            if i == 0:
                report.loss_before = value
            if not np.isfinite(value):
                raise NumericError(f"Non-finite alignment loss at step {i}")
            backward(loss)
            report.passes.backward += 1
            step(opt, model.params)
            report.steps_taken += 1
    except NumericError as e:
        report.aborted = True
        report.error = e.message
        model.params.zero_grad()
        model.params.restore(snap)
        logger.warning(f"ActMAD-lite episode aborted after {report.steps_taken} step(s): {e.message}")

    prediction = predict_y0(model, x)
    report.passes.forward += 1
    report.y0_after = prediction
    report.loss_after = float(alignment_loss(model, stats, x).value)
    report.idempotence_error = float(np.mean(idempotence_errors(model, None, x, cfg.loss_norm)))
    report.passes.diagnostic += 3

    model.params.restore(snap)
    return prediction, report


def base_predict(model: DualInputModel, x: np.ndarray) -> np.ndarray:
    """Plain y0 = f(x, 0), no adaptation."""
    return predict_y0(model, x)
