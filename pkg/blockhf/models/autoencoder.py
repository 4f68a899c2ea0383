#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
Deep autoencoder: tanh hidden layers, a logistic output layer, and the mean
squared reconstruction error against the input itself.

Parameter leaves are named "encoder.<i>.W", "encoder.<i>.b", "decoder.<i>.W", ...
in the order the layers are applied.
"""

from ..autodiff.graph import Constant, Graph, GraphBuilder, Ref, Uniform
from ..errors import ConfigError
from ..linalg import glorot_bound
from .spec import AUTOENCODER, ModelSpec


def _dense(builder: GraphBuilder, h: Ref, prefix: str, fan_in: int, fan_out: int) -> Ref:
    W = builder.parameter(
        f"{prefix}.W", (fan_in, fan_out), Uniform(glorot_bound(fan_in, fan_out))
    )
    b = builder.parameter(f"{prefix}.b", (fan_out,), Constant(0.0))
    return builder.add(builder.matmul(h, W), b)


def build_autoencoder(spec: ModelSpec) -> Graph:
    if spec.kind != AUTOENCODER:
        raise ConfigError(f"not an autoencoder spec: {spec.kind}", key="model.kind")

    builder = GraphBuilder()
    x = builder.input("x")

    h = x
    encoder = spec.sizes
    for i, (fan_in, fan_out) in enumerate(zip(encoder, encoder[1:])):
        h = builder.tanh(_dense(builder, h, f"encoder.{i}", fan_in, fan_out))

    decoder = spec.decoder_sizes
    last = len(decoder) - 2
    for i, (fan_in, fan_out) in enumerate(zip(decoder, decoder[1:])):
        pre_activation = _dense(builder, h, f"decoder.{i}", fan_in, fan_out)
        if i == last:
            # Pixels live in [0, 1]; so does the reconstruction.
            h = builder.sigmoid(pre_activation)
        else:
            h = builder.tanh(pre_activation)

    return builder.build(output=h, loss=builder.mse_loss(h, x))
