"""
The two benchmark networks and the canonical parameter flattening.
"""

from .autoencoder import build_autoencoder
from .lstm import build_stacked_lstm
from .objective import batch_accuracy, batch_loss
from .params import ParamVector, flatten, initial_parameters, unflatten
from .presets import MODEL_PRESETS, build_model, model_preset
from .spec import AUTOENCODER, STACKED_LSTM, ModelSpec

__all__ = [
    "AUTOENCODER",
    "MODEL_PRESETS",
    "ModelSpec",
    "ParamVector",
    "STACKED_LSTM",
    "batch_accuracy",
    "batch_loss",
    "build_autoencoder",
    "build_model",
    "build_stacked_lstm",
    "flatten",
    "initial_parameters",
    "model_preset",
    "unflatten",
]
