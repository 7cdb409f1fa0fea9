"""
Weights file format.

    magic   5 bytes  b"ITTT1"
    header  int32 little-endian: input_dim, label_dim, n_hidden,
            n_hidden widths, activation code, task code
    body    float64 little-endian parameters, layer by layer,
            weight [in×out] row-major then bias [out]
"""
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ..constants.status import Activation, TaskKind
from ..exceptions.handler import DimensionError, FileOperationError, ValidationError
from ..utils.logging import get_logger
from .model import DualInputModel, NeutralSignal

MAGIC = b"ITTT1"

_ACTIVATION_CODES = {Activation.RELU: 0, Activation.ELU: 1}
_TASK_CODES = {TaskKind.REGRESSION: 0, TaskKind.CLASSIFICATION: 1}

logger = get_logger("dualnet.serialization")


def save_weights(model: DualInputModel, path: Union[str, Path]) -> Path:
    path = Path(path)
    header = [
        model.input_dim,
        model.label_dim,
        len(model.hidden),
        *model.hidden,
        _ACTIVATION_CODES[model.activation],
        _TASK_CODES[model.task]
    ]
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as f:
            f.write(MAGIC)
            f.write(np.asarray(header, dtype="<i4").tobytes())
            for entry in model.params:
                f.write(np.ascontiguousarray(entry.tensor, dtype="<f8").tobytes())
    except OSError as e:
        raise FileOperationError(f"Cannot write weights: {e}", str(path)) from e

    logger.debug(f"Saved {model.params.size()} parameters to {path}")
    return path


def load_weights(path: Union[str, Path], neutral: Optional[NeutralSignal] = None) -> DualInputModel:
    """Rebuild a model from a weights file; the neutral signal defaults by task."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise FileOperationError(f"Cannot read weights: {e}", str(path)) from e

    if not data.startswith(MAGIC):
        raise FileOperationError("Not a weights file (bad magic)", str(path))

    offset = len(MAGIC)

    def read_ints(count: int) -> np.ndarray:
        nonlocal offset
        end = offset + 4 * count
        if end > len(data):
            raise FileOperationError("Truncated weights header", str(path))
        values = np.frombuffer(data[offset:end], dtype="<i4")
        offset = end
        return values

    input_dim, label_dim, n_hidden = (int(v) for v in read_ints(3))
    if n_hidden < 0:
        raise FileOperationError("Corrupt weights header", str(path))
    hidden = [int(v) for v in read_ints(n_hidden)]
    activation_code, task_code = (int(v) for v in read_ints(2))

    activations = {code: kind for kind, code in _ACTIVATION_CODES.items()}
    tasks = {code: kind for kind, code in _TASK_CODES.items()}
    if activation_code not in activations or task_code not in tasks:
        raise FileOperationError("Unknown activation or task code", str(path))

    try:
        model = DualInputModel(
            input_dim,
            label_dim,
            hidden=hidden,
            activation=activations[activation_code],
            task=tasks[task_code],
            neutral=neutral
        )
    except (ValidationError, DimensionError) as e:
        raise FileOperationError(f"Corrupt weights header: {e.message}", str(path)) from e

    expected = 8 * model.params.size()
    if len(data) - offset != expected:
        raise FileOperationError(
            f"Weights body holds {len(data) - offset} bytes, architecture needs {expected}",
            str(path)
        )
    for entry in model.params:
        count = entry.tensor.size
        values = np.frombuffer(data[offset:offset + 8 * count], dtype="<f8")
        model.params.assign(entry.name, values.reshape(entry.tensor.shape))
        offset += 8 * count

    logger.debug(f"Loaded {model.params.size()} parameters from {path}")
    return model
