"""
Differentiable operations over dense float64 tensors.

Broadcasting is limited to scalar-tensor pairs, matching shapes, and the
explicit row-bias case of `add_bias`. Each op validates shapes, computes
the forward value and registers the rule mapping the output gradient to
one gradient per parent.
"""
from typing import Union

import numpy as np

from ..constants.status import LossNorm
from ..exceptions.handler import DimensionError, ValidationError
from .node import ArrayLike, Node, lift

Operand = Union[Node, ArrayLike]


def _is_scalar(node: Node) -> bool:
    return node.value.ndim == 0


def _reduce_to(grad: np.ndarray, node: Node) -> np.ndarray:
    return np.asarray(grad.sum()) if _is_scalar(node) else grad


def _check_same_or_scalar(op: str, a: Node, b: Node) -> None:
    if a.shape != b.shape and not (_is_scalar(a) or _is_scalar(b)):
        raise DimensionError(f"{op}: operands must match or one must be scalar", [a.shape, b.shape])


def matmul(a: Operand, b: Operand) -> Node:
    a, b = lift(a), lift(b)
    if a.value.ndim != 2 or b.value.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError("matmul: inner dimensions disagree", [a.shape, b.shape])

    def rule(g):
        return g @ b.value.T, a.value.T @ g

    return Node(a.value @ b.value, (a, b), rule, label="matmul")


def add(a: Operand, b: Operand) -> Node:
    a, b = lift(a), lift(b)
    _check_same_or_scalar("add", a, b)

    def rule(g):
        return _reduce_to(g, a), _reduce_to(g, b)

    return Node(a.value + b.value, (a, b), rule, label="add")


def sub(a: Operand, b: Operand) -> Node:
    a, b = lift(a), lift(b)
    _check_same_or_scalar("sub", a, b)

    def rule(g):
        return _reduce_to(g, a), _reduce_to(-g, b)

    return Node(a.value - b.value, (a, b), rule, label="sub")


def mul(a: Operand, b: Operand) -> Node:
    a, b = lift(a), lift(b)
    _check_same_or_scalar("mul", a, b)

    def rule(g):
        return _reduce_to(g * b.value, a), _reduce_to(g * a.value, b)

    return Node(a.value * b.value, (a, b), rule, label="mul")


def scale(a: Operand, factor: float) -> Node:
    a = lift(a)
    return Node(a.value * factor, (a,), lambda g: (g * factor,), label="scale")


def add_bias(a: Operand, bias: Operand) -> Node:
    """a [m×n] + bias [n], the bias repeated over the batch axis."""
    a, bias = lift(a), lift(bias)
    if a.value.ndim != 2 or bias.value.ndim != 1 or a.shape[1] != bias.shape[0]:
        raise DimensionError("add_bias: bias must match the last axis", [a.shape, bias.shape])

    def rule(g):
        return g, g.sum(axis=0)

    return Node(a.value + bias.value, (a, bias), rule, label="add_bias")


def reshape(a: Operand, shape: tuple) -> Node:
    a = lift(a)
    try:
        value = a.value.reshape(shape)
    except ValueError as e:
        raise DimensionError(f"reshape: {e}", [a.shape, shape]) from e
    return Node(value, (a,), lambda g: (g.reshape(a.shape),), label="reshape")


def relu(a: Operand) -> Node:
    a = lift(a)
    mask = a.value > 0
    return Node(np.where(mask, a.value, 0.0), (a,), lambda g: (g * mask,), label="relu")


def elu(a: Operand, alpha: float = 1.0) -> Node:
    a = lift(a)
    positive = a.value > 0
    negative_part = alpha * np.expm1(np.minimum(a.value, 0.0))
    value = np.where(positive, a.value, negative_part)
    slope = np.where(positive, 1.0, negative_part + alpha)
    return Node(value, (a,), lambda g: (g * slope,), label="elu")


def concat(a: Operand, b: Operand, axis: int = -1) -> Node:
    a, b = lift(a), lift(b)
    if a.value.ndim != b.value.ndim:
        raise DimensionError("concat: operands differ in rank", [a.shape, b.shape])
    axis = axis % a.value.ndim
    off_axis_a = a.shape[:axis] + a.shape[axis + 1:]
    off_axis_b = b.shape[:axis] + b.shape[axis + 1:]
    if off_axis_a != off_axis_b:
        raise DimensionError(f"concat: shapes disagree off axis {axis}", [a.shape, b.shape])
    split = a.shape[axis]

    def rule(g):
        return np.take(g, np.arange(split), axis=axis), np.take(g, np.arange(split, g.shape[axis]), axis=axis)

    return Node(np.concatenate([a.value, b.value], axis=axis), (a, b), rule, label="concat")


def sum_all(a: Operand) -> Node:
    a = lift(a)
    return Node(np.asarray(a.value.sum()), (a,), lambda g: (np.full(a.shape, float(g)),), label="sum")


def mean_all(a: Operand) -> Node:
    a = lift(a)
    count = a.value.size
    return Node(np.asarray(a.value.mean()), (a,), lambda g: (np.full(a.shape, float(g) / count),), label="mean")


def mean_rows(a: Operand) -> Node:
    """Mean over the batch axis: [m×n] -> [n]."""
    a = lift(a)
    if a.value.ndim != 2:
        raise DimensionError("mean_rows: expected a matrix", [a.shape])
    m = a.shape[0]
    return Node(a.value.mean(axis=0), (a,), lambda g: (np.broadcast_to(g / m, a.shape).copy(),), label="mean_rows")


def var_rows(a: Operand) -> Node:
    """Population variance over the batch axis: [m×n] -> [n]."""
    a = lift(a)
    if a.value.ndim != 2:
        raise DimensionError("var_rows: expected a matrix", [a.shape])
    m = a.shape[0]
    centered = a.value - a.value.mean(axis=0)
    return Node((centered ** 2).mean(axis=0), (a,), lambda g: (2.0 * centered * g / m,), label="var_rows")


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax(a: Operand) -> Node:
    """Softmax over the last axis."""
    a = lift(a)
    s = _softmax(a.value)

    def rule(g):
        return (s * (g - (g * s).sum(axis=-1, keepdims=True)),)

    return Node(s, (a,), rule, label="softmax")


def _check_pair(op: str, a: Node, b: Node) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{op}: operands must have identical shapes", [a.shape, b.shape])


def mse(a: Operand, b: Operand) -> Node:
    """Mean of squared differences over every element."""
    a, b = lift(a), lift(b)
    _check_pair("mse", a, b)
    diff = a.value - b.value
    count = diff.size

    def rule(g):
        grad = 2.0 * diff * (float(g) / count)
        return grad, -grad

    return Node(np.asarray((diff ** 2).mean()), (a, b), rule, label="mse")


def l1(a: Operand, b: Operand) -> Node:
    """Mean of absolute differences over every element."""
    a, b = lift(a), lift(b)
    _check_pair("l1", a, b)
    diff = a.value - b.value
    count = diff.size

    def rule(g):
        grad = np.sign(diff) * (float(g) / count)
        return grad, -grad

    return Node(np.asarray(np.abs(diff).mean()), (a, b), rule, label="l1")


def softmax_ce(logits: Operand, one_hot: Operand) -> Node:
    """Cross-entropy of softmax(logits) against target rows, averaged over rows."""
    logits, one_hot = lift(logits), lift(one_hot)
    _check_pair("softmax_ce", logits, one_hot)
    z = logits.value if logits.value.ndim == 2 else logits.value.reshape(1, -1)
    y = one_hot.value.reshape(z.shape)
    rows = z.shape[0]
    shifted = z - z.max(axis=-1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    probs = np.exp(log_probs)
    loss = -(y * log_probs).sum() / rows

    def rule(g):
        g = float(g)
        grad_logits = (probs * y.sum(axis=-1, keepdims=True) - y) * (g / rows)
        grad_targets = -log_probs * (g / rows)
        return grad_logits.reshape(logits.shape), grad_targets.reshape(one_hot.shape)

    return Node(np.asarray(loss), (logits, one_hot), rule, label="softmax_ce")


def norm_loss(a: Operand, b: Operand, norm: LossNorm = LossNorm.L2) -> Node:
    """‖a − b‖ realized as mse (L2) or l1 (L1)."""
    if norm == LossNorm.L2:
        return mse(a, b)
    if norm == LossNorm.L1:
        return l1(a, b)
    raise ValidationError(f"Unknown loss norm '{norm}'", "loss_norm")


def row_distance(a: np.ndarray, b: np.ndarray, norm: LossNorm = LossNorm.L2) -> np.ndarray:
    """Per-row ‖a − b‖ with the same reduction as norm_loss, outside the graph."""
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    if a.shape != b.shape:
        raise DimensionError("row_distance: operands must have identical shapes", [a.shape, b.shape])
    diff = a - b
    if norm == LossNorm.L2:
        return (diff ** 2).mean(axis=1)
    return np.abs(diff).mean(axis=1)
