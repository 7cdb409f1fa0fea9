from typing import Union

import numpy as np

from ..constants.status import LossNorm, TaskKind
from ..diffcore import Node, add, constant, norm_loss, scale, softmax_ce
from ..dualnet.model import DualInputModel


def supervised_term(model: DualInputModel, output: Node, target: Union[Node, np.ndarray], norm: LossNorm) -> Node:
    """‖output − target‖: cross-entropy on logits for classification, the configured norm otherwise."""
    if model.task == TaskKind.CLASSIFICATION:
        return softmax_ce(output, target)
    return norm_loss(output, target, norm)


def composite_loss(
    model: DualInputModel,
    x: np.ndarray,
    y: np.ndarray,
    norm: LossNorm = LossNorm.L2,
    aux_weight: float = 1.0,
    neutral_weight: float = 1.0
) -> Node:
    """
    Dual-input training loss ‖f(x, y) − y‖ + ‖f(x, 0) − y‖.

    Both forward passes share the batch and both contribute gradients.
    The two terms are weighted 1:1 unless configured otherwise.
    """
    target = constant(y)
    with_label = model.forward(x, y)
    with_neutral = model.forward(x, model.neutral_like(x))
    return add(
        scale(supervised_term(model, with_label, target, norm), aux_weight),
        scale(supervised_term(model, with_neutral, target, norm), neutral_weight)
    )
