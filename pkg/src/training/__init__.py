from .losses import composite_loss, supervised_term
from .trainer import TrainConfig, TrainReport, eval_task_error, fit, task_error

__all__ = [
    "composite_loss",
    "supervised_term",
    "TrainConfig",
    "TrainReport",
    "eval_task_error",
    "fit",
    "task_error"
]
