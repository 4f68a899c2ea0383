#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
Named model specs, addressable from experiment configs.
"""

from typing import Dict

from ..autodiff.graph import Graph
from ..errors import ConfigError
from .autoencoder import build_autoencoder
from .lstm import build_stacked_lstm
from .spec import AUTOENCODER, STACKED_LSTM, ModelSpec

MODEL_PRESETS: Dict[str, ModelSpec] = {
    # 784-1000-500-250-30 with a mirrored decoder
    "autoencoder-mnist": ModelSpec(kind=AUTOENCODER, sizes=(784, 1000, 500, 250, 30)),
    # desk-scale autoencoder used by the trend checks
    "autoencoder-small": ModelSpec(kind=AUTOENCODER, sizes=(64, 32, 16, 8)),
    # three peephole LSTM layers of 10 units over 49 pixel steps
    "lstm3x10": ModelSpec(
        kind=STACKED_LSTM, layers=3, hidden=10, input_size=1, classes=10, steps=49
    ),
}


def model_preset(name: str) -> ModelSpec:
    try:
        return MODEL_PRESETS[name]
    except KeyError:
        raise ConfigError(
            f"unknown model preset {name!r}; choose from {', '.join(sorted(MODEL_PRESETS))}",
            key="model.preset",
        )


def build_model(spec: ModelSpec) -> Graph:
    if spec.kind == AUTOENCODER:
        return build_autoencoder(spec)
    return build_stacked_lstm(spec)
