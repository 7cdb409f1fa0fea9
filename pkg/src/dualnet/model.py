from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..constants.status import Activation, NeutralKind, TaskKind
from ..diffcore import (
    Node,
    add_bias,
    as_tensor,
    concat,
    constant,
    elu,
    matmul,
    relu,
    reshape,
    softmax,
)
from ..diffcore.ops import _softmax
from ..diffcore.params import ParamStore
from ..exceptions.handler import ContractError, DimensionError, ValidationError
from ..utils.validation import validate_positive_integer


@dataclass(frozen=True, eq=False)
class NeutralSignal:
    """The constant label-shaped "no label" input."""
    value: np.ndarray

    def batch(self, n: int) -> np.ndarray:
        return np.tile(self.value, (n, 1))


@dataclass(frozen=True, eq=False)
class PredictionPair:
    y0: np.ndarray
    y1: np.ndarray


class ModelSpec(BaseModel):
    """Architecture of a dual-input network; dims come from the dataset."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    hidden: List[int] = Field(default_factory=lambda: [128, 128, 128, 128])
    activation: Activation = Activation.ELU
    task: TaskKind = TaskKind.REGRESSION
    neutral: NeutralKind = NeutralKind.DEFAULT
    neutral_value: Optional[float] = None
    elu_alpha: float = Field(default=1.0, gt=0)


def neutral_signal(label_dim: int, kind: NeutralKind = NeutralKind.ZEROS, c: Optional[float] = None) -> NeutralSignal:
    validate_positive_integer(label_dim, "label_dim")
    kind = NeutralKind(kind)
    if kind == NeutralKind.CONSTANT:
        if c is None:
            raise ValidationError("A constant neutral signal needs a value", "neutral_value")
        value = np.full(label_dim, float(c))
    elif kind == NeutralKind.ZEROS:
        value = np.zeros(label_dim)
    else:
        raise ValidationError(f"Neutral kind '{kind.value}' needs a task; use default_neutral", "neutral")
    value.flags.writeable = False
    return NeutralSignal(value)


def default_neutral(task: TaskKind, label_dim: int) -> NeutralSignal:
    """Zeros for regression, the uniform vector 1/K for K-class classification."""
    if TaskKind(task) == TaskKind.CLASSIFICATION:
        return neutral_signal(label_dim, NeutralKind.CONSTANT, 1.0 / label_dim)
    return neutral_signal(label_dim, NeutralKind.ZEROS)


def neutral_from_spec(spec: ModelSpec, label_dim: int) -> NeutralSignal:
    if spec.neutral == NeutralKind.DEFAULT:
        return default_neutral(spec.task, label_dim)
    return neutral_signal(label_dim, spec.neutral, spec.neutral_value)


class DualInputModel:
    """
    MLP f_θ(x, aux) whose first layer reads the concatenation [x, aux].

    Parameters live in `params` as layer{i}.weight [in×out] and
    layer{i}.bias [out]; the last layer is linear and emits label_dim
    values (logits for classification).
    """

    def __init__(
        self,
        input_dim: int,
        label_dim: int,
        hidden: Sequence[int] = (128, 128, 128, 128),
        activation: Activation = Activation.ELU,
        task: TaskKind = TaskKind.REGRESSION,
        neutral: Optional[NeutralSignal] = None,
        seed: int = 0,
        elu_alpha: float = 1.0
    ):
        validate_positive_integer(input_dim, "input_dim")
        validate_positive_integer(label_dim, "label_dim")
        for width in hidden:
            validate_positive_integer(width, "hidden")

        self.input_dim = input_dim
        self.label_dim = label_dim
        self.hidden = list(hidden)
        self.activation = Activation(activation)
        self.task = TaskKind(task)
        self.elu_alpha = elu_alpha
        self.neutral = neutral if neutral is not None else default_neutral(self.task, label_dim)
        if self.neutral.value.shape != (label_dim,):
            raise DimensionError("Neutral signal must be label-shaped", [self.neutral.value.shape, (label_dim,)])

        self.params = ParamStore()
        rng = np.random.default_rng(seed)
        widths = self.layer_widths
        for i, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            self.params.add(f"layer{i}.weight", rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            self.params.add(f"layer{i}.bias", np.zeros(fan_out))

    @classmethod
    def from_spec(cls, spec: ModelSpec, input_dim: int, label_dim: int, seed: int = 0) -> "DualInputModel":
        return cls(
            input_dim,
            label_dim,
            hidden=spec.hidden,
            activation=spec.activation,
            task=spec.task,
            neutral=neutral_from_spec(spec, label_dim),
            seed=seed,
            elu_alpha=spec.elu_alpha
        )

    @property
    def layer_widths(self) -> List[int]:
        return [self.input_dim + self.label_dim, *self.hidden, self.label_dim]

    @property
    def n_layers(self) -> int:
        return len(self.hidden) + 1

    def same_architecture(self, other: "DualInputModel") -> bool:
        return (
            self.layer_widths == other.layer_widths
            and self.activation == other.activation
            and self.task == other.task
        )

    def clone(self) -> "DualInputModel":
        twin = DualInputModel.__new__(DualInputModel)
        twin.__dict__.update(self.__dict__)
        twin.hidden = list(self.hidden)
        twin.params = self.params.clone()
        return twin

    def _activate(self, node: Node) -> Node:
        if self.activation == Activation.RELU:
            return relu(node)
        return elu(node, self.elu_alpha)

    def forward(self, x, aux: Union[Node, np.ndarray], capture: Optional[List[Node]] = None) -> Node:
        """
        Differentiable f_θ(x, aux).

        x is [input_dim] or [n×input_dim]; aux is label-shaped with the same
        leading axis (a single label-shaped aux is repeated over a batch).
        When `capture` is given, every post-activation hidden node is
        appended to it in layer order.
        """
        x_arr = as_tensor(x)
        single = x_arr.ndim == 1
        x2 = x_arr.reshape(1, -1) if single else x_arr
        if x2.ndim != 2 or x2.shape[1] != self.input_dim:
            raise DimensionError("forward: x does not match input_dim", [x_arr.shape, (self.input_dim,)])

        aux_node = aux if isinstance(aux, Node) else constant(aux)
        if aux_node.value.ndim == 1:
            if isinstance(aux, Node):
                aux_node = reshape(aux_node, (1, -1))
            else:
                aux_node = constant(np.tile(aux_node.value, (x2.shape[0], 1)))
        if aux_node.shape != (x2.shape[0], self.label_dim):
            raise DimensionError(
                "forward: aux does not match (batch, label_dim)",
                [aux_node.shape, (x2.shape[0], self.label_dim)]
            )

        h = concat(constant(x2), aux_node, axis=1)
        for i in range(self.n_layers):
            h = add_bias(matmul(h, self.params.node(f"layer{i}.weight")), self.params.node(f"layer{i}.bias"))
            if i < self.n_layers - 1:
                h = self._activate(h)
                if capture is not None:
                    capture.append(h)

        return reshape(h, (self.label_dim,)) if single else h

    __call__ = forward

    def readout(self, node: Node) -> Node:
        """Map outputs to label space: softmax probabilities for classification."""
        return softmax(node) if self.task == TaskKind.CLASSIFICATION else node

    def readout_value(self, values: np.ndarray) -> np.ndarray:
        return _softmax(values) if self.task == TaskKind.CLASSIFICATION else values

    def neutral_like(self, x) -> np.ndarray:
        x_arr = as_tensor(x)
        return self.neutral.value.copy() if x_arr.ndim == 1 else self.neutral.batch(x_arr.shape[0])


def forward(model: DualInputModel, x, aux) -> Node:
    return model.forward(x, aux)


def predict_y0(model: DualInputModel, x) -> np.ndarray:
    """f(x, 0) as a plain array, outside any graph."""
    return model.forward(x, model.neutral_like(x)).value.copy()


def predict_pair(model_for_y0: DualInputModel, model_for_y1: DualInputModel, x) -> PredictionPair:
    """y0 = f(x, 0) from the first model, y1 = g(x, y0) from the second."""
    if not model_for_y0.same_architecture(model_for_y1):
        raise ContractError(
            "predict_pair needs models with identical dimensions",
            {"y0_model": model_for_y0.layer_widths, "y1_model": model_for_y1.layer_widths}
        )
    y0 = predict_y0(model_for_y0, x)
    y1 = model_for_y1.forward(x, model_for_y0.readout_value(y0)).value.copy()
    return PredictionPair(y0=y0, y1=y1)
