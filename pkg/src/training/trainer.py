from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..constants.status import EvalMode, LossNorm, OptimizerKind, TaskKind
from ..diffcore import backward, make_optimizer, step
from ..dualnet.model import DualInputModel, predict_y0
from ..exceptions.handler import ContractError, NumericError, ValidationError
from ..states.dataset import Dataset
from ..utils.logging import get_logger, log_execution_time
from .losses import composite_loss

logger = get_logger("training.fit")


class TrainConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    epochs: int = Field(default=200, ge=0)
    batch_size: int = Field(default=64, ge=1)
    optimizer: OptimizerKind = OptimizerKind.ADAM
    lr: float = Field(default=1e-3, gt=0)
    loss_norm: LossNorm = LossNorm.L2
    shuffle_seed: int = 0
    early_stop_loss: Optional[float] = Field(default=None, ge=0)
    aux_weight: float = Field(default=1.0, ge=0)
    neutral_weight: float = Field(default=1.0, ge=0)


@dataclass
class TrainReport:
    curve: List[float] = field(default_factory=list)
    stopped_early: bool = False

    @property
    def final_loss(self) -> Optional[float]:
        return self.curve[-1] if self.curve else None

    @property
    def epochs_run(self) -> int:
        return len(self.curve)

    def to_dict(self) -> dict:
        return {
            "curve": list(self.curve),
            "final_loss": self.final_loss,
            "epochs_run": self.epochs_run,
            "stopped_early": self.stopped_early
        }


@log_execution_time
def fit(model: DualInputModel, dataset: Dataset, cfg: TrainConfig) -> TrainReport:
    """
    Train the model in place on every row of `dataset` with the composite loss.

    Args:
        model: Dual-input model, mutated in place
        dataset: Training rows (pass `dataset.train()` for a split dataset)
        cfg: Epochs, batching, optimizer and loss settings

    Returns:
        TrainReport with one mean loss per completed epoch

    Raises:
        NumericError: when a batch loss or gradient stops being finite
    """
    n = len(dataset)
    if n == 0:
        raise ContractError("fit needs a non-empty dataset")
    if cfg.batch_size > n:
        raise ValidationError(f"batch_size {cfg.batch_size} exceeds dataset size {n}", "batch_size")

    report = TrainReport()
    if cfg.epochs == 0:
        return report

    opt = make_optimizer(cfg.optimizer, cfg.lr)
    rng = np.random.default_rng(cfg.shuffle_seed)
    model.params.zero_grad()

    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            rows = order[start:start + cfg.batch_size]
            loss = composite_loss(
                model,
                dataset.features[rows],
                dataset.labels[rows],
                cfg.loss_norm,
                cfg.aux_weight,
                cfg.neutral_weight
            )
            value = float(loss.value)
            if not np.isfinite(value):
                raise NumericError(f"Non-finite training loss at epoch {epoch}", epoch=epoch)

            backward(loss)
            try:
                step(opt, model.params)
            except NumericError as e:
                raise NumericError(e.message, parameter=e.parameter, epoch=epoch) from e
            total += value * len(rows)

        epoch_loss = total / n
        report.curve.append(epoch_loss)
        logger.debug(f"epoch {epoch}: loss {epoch_loss:.6g}")

        if cfg.early_stop_loss is not None and epoch_loss <= cfg.early_stop_loss:
            report.stopped_early = True
            break

    logger.info(
        f"fit: {report.epochs_run} epoch(s), final loss {report.final_loss:.6g}"
        + (" (early stop)" if report.stopped_early else "")
    )
    return report


def task_error(model: DualInputModel, predictions: np.ndarray, labels: np.ndarray) -> float:
    """MSE for regression, 1 − accuracy for classification."""
    if model.task == TaskKind.CLASSIFICATION:
        return float(np.mean(np.argmax(predictions, axis=1) != np.argmax(labels, axis=1)))
    return float(np.mean((predictions - labels) ** 2))


def eval_task_error(model: DualInputModel, dataset: Dataset, mode: EvalMode = EvalMode.Y0) -> float:
    if len(dataset) == 0:
        raise ContractError("eval_task_error needs a non-empty dataset")
    if EvalMode(mode) == EvalMode.ORACLE_AUX:
        predictions = model.forward(dataset.features, dataset.labels).value
    else:
        predictions = predict_y0(model, dataset.features)
    return task_error(model, predictions, dataset.labels)
