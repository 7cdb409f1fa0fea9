from .model import (
    DualInputModel,
    ModelSpec,
    NeutralSignal,
    PredictionPair,
    default_neutral,
    forward,
    neutral_from_spec,
    neutral_signal,
    predict_pair,
    predict_y0
)
from .serialization import load_weights, save_weights

__all__ = [
    "DualInputModel",
    "ModelSpec",
    "NeutralSignal",
    "PredictionPair",
    "default_neutral",
    "forward",
    "neutral_from_spec",
    "neutral_signal",
    "predict_pair",
    "predict_y0",
    "load_weights",
    "save_weights"
]
