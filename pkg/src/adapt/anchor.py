from dataclasses import dataclass
from typing import Optional

from ..constants.status import AnchorKind
from ..diffcore.params import ParamSnapshot, ParamStore
from ..dualnet.model import DualInputModel
from ..exceptions.handler import ContractError
from ..utils.validation import validate_range


@dataclass
class AnchorState:
    """
    Reference network for the second application f(x, y0).

    A frozen anchor holds read-only parameters fixed at construction;
    an EMA anchor changes only through ema_update.
    """
    kind: AnchorKind
    model: DualInputModel
    decay: Optional[float] = None

    @property
    def params(self) -> ParamStore:
        return self.model.params

    def snapshot(self) -> ParamSnapshot:
        return self.model.params.snapshot()


def make_frozen_anchor(model: DualInputModel) -> AnchorState:
    anchor_model = model.clone()
    anchor_model.params.freeze()
    return AnchorState(kind=AnchorKind.FROZEN, model=anchor_model)


def make_ema_anchor(model: DualInputModel, decay: float) -> AnchorState:
    validate_range(decay, "ema_decay", 0.0, 1.0)
    return AnchorState(kind=AnchorKind.EMA, model=model.clone(), decay=float(decay))


def ema_update(anchor: AnchorState, model: DualInputModel) -> None:
    """anchor.p ← decay·anchor.p + (1 − decay)·model.p for every parameter."""
    if anchor.kind != AnchorKind.EMA:
        raise ContractError("ema_update needs an EMA anchor", {"kind": anchor.kind.value})
    if anchor.params.names() != model.params.names():
        raise ContractError(
            "EMA anchor and model parameters differ",
            {"anchor": anchor.params.names(), "model": model.params.names()}
        )
    for target, source in zip(anchor.params, model.params):
        if target.tensor.shape != source.tensor.shape:
            raise ContractError(
                f"EMA shape mismatch for '{target.name}'",
                {"anchor": target.tensor.shape, "model": source.tensor.shape}
            )

    decay = anchor.decay
    for target, source in zip(anchor.params, model.params):
        target.tensor *= decay
        target.tensor += (1.0 - decay) * source.tensor
