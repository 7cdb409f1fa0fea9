"""
Test-time training episodes.

All episodes minimize the deviation from idempotence of the live model
f_θ. Offline and online episodes compare y0 = f_θ(x, 0) with the constant
target F(x, y0) computed by an anchor network; the naive ablation uses
the live model for both applications and differentiates through both.
"""
import weakref
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..constants.status import AnchorKind, LossNorm, OptimizerKind, TaskKind, TTTMode
from ..diffcore import Node, backward, detach, make_optimizer, norm_loss, row_distance, step
from ..diffcore.optim import Optimizer
from ..diffcore.params import ParamSnapshot
from ..dualnet.model import DualInputModel, PredictionPair, predict_y0
from ..exceptions.handler import ContractError, NumericError
from ..utils.logging import get_logger
from .anchor import AnchorState, ema_update, make_ema_anchor
from .counters import PassCounter

logger = get_logger("adapt.episodes")

PROBE_SAMPLES = 8


class TTTConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    steps: int = Field(default=3, ge=1, le=50)
    lr: float = Field(default=1e-3, ge=0)
    optimizer: OptimizerKind = OptimizerKind.SGD
    mode: TTTMode = TTTMode.OFFLINE
    loss_norm: LossNorm = LossNorm.L2
    ema_decay: float = Field(default=0.99, ge=0, le=1)

    def for_mode(self, mode: TTTMode) -> "TTTConfig":
        return self.model_copy(update={"mode": TTTMode(mode)})


@dataclass
class EpisodeReport:
    """Outcome of one episode; idempotence_error is the mean d of the final prediction."""
    loss_before: float = float("nan")
    loss_after: float = float("nan")
    y0_before: Optional[np.ndarray] = None
    y0_after: Optional[np.ndarray] = None
    steps_taken: int = 0
    aborted: bool = False
    error: Optional[str] = None
    passes: PassCounter = field(default_factory=PassCounter)
    idempotence_error: float = float("nan")
    probe_identity_gap: Optional[float] = None


def _distance(model: DualInputModel, y1: np.ndarray, y0: np.ndarray, norm: LossNorm) -> np.ndarray:
    return row_distance(model.readout_value(y1), model.readout_value(y0), norm)


def idempotence_errors(
    model: DualInputModel,
    anchor: Optional[AnchorState],
    x: np.ndarray,
    norm: LossNorm = LossNorm.L2
) -> np.ndarray:
    """Per-row d = ‖second(x, y0) − y0‖ with y0 = model(x, 0)."""
    second = anchor.model if anchor is not None else model
    y0 = predict_y0(model, x)
    y1 = second.forward(x, model.readout_value(y0)).value
    return _distance(model, y1, y0, norm)


def idempotence_error(
    model: DualInputModel,
    anchor: Optional[AnchorState],
    x: np.ndarray,
    norm: LossNorm = LossNorm.L2
) -> float:
    return float(np.mean(idempotence_errors(model, anchor, x, norm)))


def ttt_loss(
    model: DualInputModel,
    x: np.ndarray,
    second: Optional[DualInputModel] = None,
    norm: LossNorm = LossNorm.L2,
    naive: bool = False
) -> Tuple[Node, Node]:
    """
    Test-time objective and the differentiable y0 it was built from.

    With naive=False the target second(x, y0) is a constant: gradient
    reaches θ only through the standalone f_θ(x, 0) term, and never
    through the anchor weights or y0's appearance inside the anchor's
    input. With naive=True the live model is applied twice and gradient
    flows through both applications.
    """
    y0 = model.forward(x, model.neutral_like(x))
    p0 = model.readout(y0)
    if naive:
        p1 = model.readout(model.forward(x, p0))
        return norm_loss(p1, p0, norm), y0

    reference = second if second is not None else model
    y1 = reference.forward(x, p0.value.copy())
    target = detach(reference.readout(y1))
    return norm_loss(target, p0, norm), y0


def identity_collapse_probe(
    model: DualInputModel,
    x: np.ndarray,
    rng: np.random.Generator,
    samples: int = PROBE_SAMPLES,
    norm: LossNorm = LossNorm.L2
) -> float:
    """
    Mean ‖f(x, a) − a‖ over random label-shaped a.

    Values near zero mean the network has collapsed toward the identity
    in its auxiliary argument.
    """
    x2 = np.atleast_2d(x)
    gaps = []
    for _ in range(samples):
        a = rng.standard_normal((len(x2), model.label_dim))
        if model.task == TaskKind.CLASSIFICATION:
            a = model.readout_value(a)
        out = model.readout_value(model.forward(x2, a).value)
        gaps.append(np.mean(row_distance(out, a, norm)))
    return float(np.mean(gaps))


def _all_finite(model: DualInputModel) -> bool:
    return all(np.all(np.isfinite(entry.tensor)) for entry in model.params)


def _run_episode(
    model: DualInputModel,
    second: DualInputModel,
    x: np.ndarray,
    cfg: TTTConfig,
    naive: bool,
    probe_rng: Optional[np.random.Generator] = None
) -> Tuple[PredictionPair, EpisodeReport]:
    snap = model.params.snapshot()
    opt = make_optimizer(cfg.optimizer, cfg.lr)
    report = EpisodeReport()
    model.params.zero_grad()

    try:
        for i in range(cfg.steps):
            loss, y0 = ttt_loss(model, x, second, cfg.loss_norm, naive)
            report.passes.forward += 2
            value = float(loss.value)
            if i == 0:
                report.loss_before = value
                report.y0_before = y0.value.copy()
            if not np.isfinite(value):
                raise NumericError(f"Non-finite test-time loss at step {i}")
            backward(loss)
            report.passes.backward += 1
            step(opt, model.params)
            report.steps_taken += 1
    except NumericError as e:
        report.aborted = True
        report.error = e.message
        model.params.zero_grad()
        model.params.restore(snap)
        logger.warning(f"Episode aborted after {report.steps_taken} step(s): {e.message}")

    y0_after = predict_y0(model, x)
    report.passes.forward += 1
    reference = model if naive else second
    y1 = reference.forward(x, model.readout_value(y0_after)).value
    report.passes.diagnostic += 1
    report.y0_after = y0_after
    report.loss_after = float(np.mean(_distance(model, y1, y0_after, cfg.loss_norm)))
    report.idempotence_error = report.loss_after

    if probe_rng is not None:
        report.probe_identity_gap = identity_collapse_probe(model, x, probe_rng, norm=cfg.loss_norm)
        report.passes.diagnostic += PROBE_SAMPLES

    model.params.restore(snap)
    return PredictionPair(y0=y0_after, y1=y1.copy()), report


def _require(condition: bool, message: str, **details) -> None:
    if not condition:
        raise ContractError(message, details)


def ttt_episode_offline(
    model: DualInputModel,
    anchor: AnchorState,
    x: np.ndarray,
    cfg: TTTConfig
) -> Tuple[PredictionPair, EpisodeReport]:
    """
    One offline IT³ episode on a batch: k steps against the frozen anchor,
    predict, then restore θ bitwise. A fresh optimizer is used every call.

    Args:
        model: Live model; unchanged when the call returns
        anchor: Frozen anchor F
        x: Batch [n×input_dim] or a single row
        cfg: Steps, learning rate, optimizer and norm

    Returns:
        (PredictionPair(y0 = adapted f_θ(x, 0), y1 = F(x, y0)), EpisodeReport)
    """
    _require(cfg.mode == TTTMode.OFFLINE, "offline episode needs mode=offline", mode=cfg.mode.value)
    _require(anchor.kind == AnchorKind.FROZEN, "offline episode needs a frozen anchor", kind=anchor.kind.value)
    _require(model.same_architecture(anchor.model), "anchor and model architectures differ")
    return _run_episode(model, anchor.model, x, cfg, naive=False)


def ttt_episode_naive(
    model: DualInputModel,
    x: np.ndarray,
    cfg: TTTConfig,
    probe_rng: Optional[np.random.Generator] = None
) -> Tuple[PredictionPair, EpisodeReport]:
    """Ablation: both applications use the live model and both carry gradient.

    With `probe_rng` the identity-collapse probe runs on the adapted
    weights before they are reset.
    """
    _require(cfg.mode == TTTMode.NAIVE, "naive episode needs mode=naive", mode=cfg.mode.value)
    return _run_episode(model, model, x, cfg, naive=True, probe_rng=probe_rng)


_session_optimizers: "weakref.WeakKeyDictionary[DualInputModel, Optimizer]" = weakref.WeakKeyDictionary()


def online_step(
    model: DualInputModel,
    anchor: AnchorState,
    x: np.ndarray,
    cfg: TTTConfig,
    optimizer: Optional[Optimizer] = None
) -> Tuple[PredictionPair, EpisodeReport]:
    """
    k steps on ‖f_EMA(x, y0) − y0‖ without reset.

    The EMA anchor is updated once after every θ update. Optimizer state
    persists between calls for the same model unless one is passed in.
    The optimizer must match cfg.optimizer and cfg.lr, otherwise
    ContractError is raised.
    On a non-finite loss the remaining steps are skipped and θ keeps its
    last finite value.
    """
    _require(cfg.mode == TTTMode.ONLINE, "online step needs mode=online", mode=cfg.mode.value)
    _require(anchor.kind == AnchorKind.EMA, "online step needs an EMA anchor", kind=anchor.kind.value)
    _require(model.same_architecture(anchor.model), "anchor and model architectures differ")

    if optimizer is None:
        optimizer = _session_optimizers.get(model)
        if optimizer is None:
            optimizer = make_optimizer(cfg.optimizer, cfg.lr)
            _session_optimizers[model] = optimizer
    _require(
        optimizer.kind == cfg.optimizer and optimizer.lr == cfg.lr,
        "online optimizer does not match the step config",
        optimizer=optimizer.kind.value, lr=optimizer.lr,
        cfg_optimizer=cfg.optimizer.value, cfg_lr=cfg.lr
    )

    report = EpisodeReport()
    last_finite: ParamSnapshot = model.params.snapshot()
    model.params.zero_grad()

    try:
        for i in range(cfg.steps):
            loss, y0 = ttt_loss(model, x, anchor.model, cfg.loss_norm)
            report.passes.forward += 2
            value = float(loss.value)
            if i == 0:
                report.loss_before = value
                report.y0_before = y0.value.copy()
            if not np.isfinite(value):
                raise NumericError(f"Non-finite online loss at step {i}")
            backward(loss)
            report.passes.backward += 1
            step(optimizer, model.params)
            if not _all_finite(model):
                raise NumericError(f"Parameters left the finite range at step {i}")
            ema_update(anchor, model)
            report.steps_taken += 1
            last_finite = model.params.snapshot()
    except NumericError as e:
        report.aborted = True
        report.error = e.message
        model.params.zero_grad()
        if not _all_finite(model):
            model.params.restore(last_finite)
        logger.warning(f"Online step aborted after {report.steps_taken} step(s): {e.message}")

    y0_after = predict_y0(model, x)
    report.passes.forward += 1
    y1 = anchor.model.forward(x, model.readout_value(y0_after)).value
    report.passes.diagnostic += 1
    report.y0_after = y0_after
    report.loss_after = float(np.mean(_distance(model, y1, y0_after, cfg.loss_norm)))
    report.idempotence_error = report.loss_after
    return PredictionPair(y0=y0_after, y1=y1.copy()), report


class OnlineAdapter:
    """An online adaptation session: live model, EMA anchor and one optimizer."""

    def __init__(self, model: DualInputModel, cfg: TTTConfig, anchor: Optional[AnchorState] = None):
        self.model = model
        self.cfg = cfg if cfg.mode == TTTMode.ONLINE else cfg.for_mode(TTTMode.ONLINE)
        self.anchor = anchor if anchor is not None else make_ema_anchor(model, self.cfg.ema_decay)
        self.optimizer = make_optimizer(self.cfg.optimizer, self.cfg.lr)
        self.passes = PassCounter()
        self.batches = 0
        self.aborted_batches = 0

    def step(self, x: np.ndarray) -> Tuple[PredictionPair, EpisodeReport]:
        pair, report = online_step(self.model, self.anchor, x, self.cfg, optimizer=self.optimizer)
        self.passes += report.passes
        self.batches += 1
        if report.aborted:
            self.aborted_batches += 1
        return pair, report
