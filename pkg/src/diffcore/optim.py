from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from ..constants.status import OptimizerKind
from ..exceptions.handler import NumericError
from ..utils.validation import validate_range
from .params import ParamStore


@dataclass
class Optimizer:
    kind: OptimizerKind
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    first_moment: Dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.kind = OptimizerKind(self.kind)
        validate_range(self.lr, "lr", 0.0)
        validate_range(self.beta1, "beta1", 0.0, 1.0)
        validate_range(self.beta2, "beta2", 0.0, 1.0)


def make_optimizer(kind: OptimizerKind, lr: float, **kwargs) -> Optimizer:
    return Optimizer(kind=OptimizerKind(kind), lr=lr, **kwargs)


def step(opt: Optimizer, params: ParamStore) -> None:
    """Apply one update from the accumulated gradients, then zero them."""
    for entry in params:
        if not np.all(np.isfinite(entry.grad)):
            raise NumericError(
                f"Non-finite gradient for parameter '{entry.name}'",
                parameter=entry.name
            )

    opt.t += 1

    if opt.kind == OptimizerKind.SGD:
        for entry in params:
            entry.tensor -= opt.lr * entry.grad
    else:
        correction1 = 1.0 - opt.beta1 ** opt.t
        correction2 = 1.0 - opt.beta2 ** opt.t
        for entry in params:
            m = opt.first_moment.setdefault(entry.name, np.zeros_like(entry.tensor))
            v = opt.second_moment.setdefault(entry.name, np.zeros_like(entry.tensor))
            m *= opt.beta1
            m += (1.0 - opt.beta1) * entry.grad
            v *= opt.beta2
            v += (1.0 - opt.beta2) * entry.grad ** 2
            entry.tensor -= opt.lr * (m / correction1) / (np.sqrt(v / correction2) + opt.eps)

    params.zero_grad()
