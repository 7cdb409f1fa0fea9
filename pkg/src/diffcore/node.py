from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions.handler import ContractError

Tensor = np.ndarray
BackwardRule = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]
ArrayLike = Union[np.ndarray, float, int, Sequence[float]]


def as_tensor(value: ArrayLike) -> Tensor:
    """Dense float64 array view of value (copies only when the dtype differs)."""
    return np.asarray(value, dtype=np.float64)


class Node:
    """
    A vertex of the define-by-run graph.

    Leaves have no parents. Parameter leaves carry a `sink`: the gradient
    buffer of their ParamStore entry, into which backward accumulates.
    """

    __slots__ = ("value", "parents", "backward_rule", "grad", "sink", "label")

    def __init__(
        self,
        value: ArrayLike,
        parents: Tuple["Node", ...] = (),
        backward_rule: Optional[BackwardRule] = None,
        sink: Optional[np.ndarray] = None,
        label: str = ""
    ):
        self.value = as_tensor(value)
        self.parents = parents
        self.backward_rule = backward_rule
        self.grad: Optional[np.ndarray] = None
        self.sink = sink
        self.label = label

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    def __repr__(self) -> str:
        name = f" {self.label}" if self.label else ""
        return f"Node{name}(shape={self.shape})"


def constant(value: ArrayLike, label: str = "") -> Node:
    """Leaf that never receives or forwards gradient."""
    return Node(value, label=label)


def detach(node: Node) -> Node:
    """Cut the graph: same value, no path back to node's ancestors."""
    return Node(node.value.copy(), label=f"detach({node.label})" if node.label else "detach")


def lift(value: Union[Node, ArrayLike]) -> Node:
    return value if isinstance(value, Node) else constant(value)


def _topological_order(root: Node) -> list:
    order = []
    visited = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node.parents:
            if id(parent) not in visited:
                stack.append((parent, False))
    return order


def backward(loss: Node) -> None:
    """
    Reverse-mode sweep from a scalar loss.

    Every reachable node gets `.grad`; parameter leaves add their gradient
    into the owning ParamStore buffer. Buffers are never zeroed here, so
    several losses can accumulate before an optimizer step.
    """
    if loss.value.size != 1 or loss.value.ndim > 1:
        raise ContractError(
            f"backward needs a scalar loss, got shape {loss.shape}",
            {"shape": loss.shape}
        )

    order = _topological_order(loss)
    grads = {id(loss): np.ones_like(loss.value)}

    for node in reversed(order):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        node.grad = g
        if node.sink is not None:
            node.sink += g
        if node.backward_rule is None:
            continue
        for parent, parent_grad in zip(node.parents, node.backward_rule(g)):
            if parent_grad is None:
                continue
            if id(parent) in grads:
                grads[id(parent)] = grads[id(parent)] + parent_grad
            else:
                grads[id(parent)] = parent_grad
