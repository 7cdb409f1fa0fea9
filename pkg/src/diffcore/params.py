from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Tuple

import numpy as np

from ..exceptions.handler import ContractError, DimensionError
from ..utils.seeding import arrays_checksum
from .node import ArrayLike, Node, as_tensor


@dataclass
class ParamEntry:
    name: str
    tensor: np.ndarray
    grad: np.ndarray


@dataclass(frozen=True, eq=False)
class ParamSnapshot:
    """Immutable copy of every parameter value, in store order."""
    entries: Tuple[Tuple[str, np.ndarray], ...]
    checksum: str = field(default="")

    def __post_init__(self):
        if not self.checksum:
            object.__setattr__(self, "checksum", arrays_checksum(array for _, array in self.entries))

    @property
    def names(self) -> List[str]:
        return [name for name, _ in self.entries]

    def get(self, name: str) -> np.ndarray:
        for entry_name, array in self.entries:
            if entry_name == name:
                return array
        raise KeyError(name)

    def matches(self, params: "ParamStore") -> bool:
        """Bitwise equality of values (names and shapes included)."""
        if self.names != params.names():
            return False
        return all(
            stored.shape == live.tensor.shape and np.array_equal(stored, live.tensor)
            for (_, stored), live in zip(self.entries, params)
        )


class ParamStore:
    """Named, ordered collection of trainable tensors and their gradient buffers."""

    def __init__(self):
        self._entries: Dict[str, ParamEntry] = {}

    def add(self, name: str, value: ArrayLike) -> np.ndarray:
        if name in self._entries:
            raise ContractError(f"Parameter '{name}' already registered", {"name": name})
        tensor = np.array(as_tensor(value), dtype=np.float64, copy=True)
        self._entries[name] = ParamEntry(name, tensor, np.zeros_like(tensor))
        return tensor

    def node(self, name: str) -> Node:
        entry = self._entries[name]
        return Node(entry.tensor, sink=entry.grad, label=name)

    def tensor(self, name: str) -> np.ndarray:
        return self._entries[name].tensor

    def grad(self, name: str) -> np.ndarray:
        return self._entries[name].grad

    def names(self) -> List[str]:
        return list(self._entries)

    def __iter__(self) -> Iterator[ParamEntry]:
        return iter(self._entries.values())

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def size(self) -> int:
        return sum(entry.tensor.size for entry in self)

    def zero_grad(self) -> None:
        for entry in self:
            entry.grad.fill(0.0)

    @property
    def frozen(self) -> bool:
        return any(not entry.tensor.flags.writeable for entry in self)

    def freeze(self) -> None:
        """Make every value read-only; any later write raises."""
        for entry in self:
            entry.tensor.flags.writeable = False

    def snapshot(self) -> ParamSnapshot:
        entries = []
        for entry in self:
            copy = entry.tensor.copy()
            copy.flags.writeable = False
            entries.append((entry.name, copy))
        return ParamSnapshot(tuple(entries))

    def restore(self, snap: ParamSnapshot) -> None:
        if snap.names != self.names():
            raise ContractError(
                "Snapshot parameters do not match the store",
                {"snapshot": snap.names, "store": self.names()}
            )
        for (name, stored), entry in zip(snap.entries, self):
            if stored.shape != entry.tensor.shape:
                raise ContractError(
                    f"Snapshot shape mismatch for '{name}'",
                    {"snapshot": stored.shape, "store": entry.tensor.shape}
                )
        for (_, stored), entry in zip(snap.entries, self):
            np.copyto(entry.tensor, stored)

    def assign(self, name: str, value: ArrayLike) -> None:
        entry = self._entries[name]
        value = as_tensor(value)
        if value.shape != entry.tensor.shape:
            raise DimensionError(f"assign: shape mismatch for '{name}'", [entry.tensor.shape, value.shape])
        np.copyto(entry.tensor, value)

    def clone(self) -> "ParamStore":
        """Independent, writable deep copy (values only; grads start at zero)."""
        other = ParamStore()
        for entry in self:
            other.add(entry.name, entry.tensor)
        return other


def snapshot(params: ParamStore) -> ParamSnapshot:
    return params.snapshot()


def restore(params: ParamStore, snap: ParamSnapshot) -> None:
    params.restore(snap)
