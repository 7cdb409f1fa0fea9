from .node import Node, Tensor, as_tensor, backward, constant, detach, lift
from .ops import (
    add,
    add_bias,
    concat,
    elu,
    l1,
    matmul,
    mean_all,
    mean_rows,
    mse,
    mul,
    norm_loss,
    relu,
    reshape,
    row_distance,
    scale,
    softmax,
    softmax_ce,
    sub,
    sum_all,
    var_rows
)
from .params import ParamEntry, ParamSnapshot, ParamStore, restore, snapshot
from .optim import Optimizer, make_optimizer, step
from .gradcheck import GradCheckReport, finite_diff_check

__all__ = [
    "Node",
    "Tensor",
    "as_tensor",
    "backward",
    "constant",
    "detach",
    "lift",
    "add",
    "add_bias",
    "concat",
    "elu",
    "l1",
    "matmul",
    "mean_all",
    "mean_rows",
    "mse",
    "mul",
    "norm_loss",
    "relu",
    "reshape",
    "row_distance",
    "scale",
    "softmax",
    "softmax_ce",
    "sub",
    "sum_all",
    "var_rows",
    "ParamEntry",
    "ParamSnapshot",
    "ParamStore",
    "restore",
    "snapshot",
    "Optimizer",
    "make_optimizer",
    "step",
    "GradCheckReport",
    "finite_diff_check"
]
