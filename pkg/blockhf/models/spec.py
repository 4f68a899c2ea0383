#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

from typing import Tuple

import attr

from ..errors import ConfigError

AUTOENCODER = "autoencoder"
STACKED_LSTM = "stacked_lstm"
MODEL_KINDS = (AUTOENCODER, STACKED_LSTM)


def _at_least(minimum: int):
    def check(instance, attribute, value):
        if instance.kind == STACKED_LSTM and value < minimum:
            raise ConfigError(
                f"must be at least {minimum}, got {value}", key=f"model.{attribute.name}"
            )

    return check


def _check_sizes(instance, attribute, sizes: Tuple[int, ...]) -> None:
    if instance.kind != AUTOENCODER:
        return
    if len(sizes) < 2:
        raise ConfigError("need an input size and at least one layer", key="model.sizes")
    if any(size <= 0 for size in sizes):
        raise ConfigError(f"layer sizes must be positive: {sizes}", key="model.sizes")


@attr.s(auto_attribs=True, frozen=True)
class ModelSpec:
    """
    What to build. An autoencoder is described by its encoder sizes, input first;
    the decoder is always the mirror image. A stacked LSTM is described by its layer
    count, hidden size, per-step input features, sequence length and class count.
    """

    kind: str = attr.ib(validator=attr.validators.in_(MODEL_KINDS))
    sizes: Tuple[int, ...] = attr.ib(default=(), converter=tuple, validator=_check_sizes)
    layers: int = attr.ib(default=1, validator=_at_least(1))
    hidden: int = attr.ib(default=1, validator=_at_least(1))
    input_size: int = attr.ib(default=1, validator=_at_least(1))
    classes: int = attr.ib(default=10, validator=_at_least(2))
    steps: int = attr.ib(default=49, validator=_at_least(1))
    forget_bias: float = 1.0

    @property
    def decoder_sizes(self) -> Tuple[int, ...]:
        return tuple(reversed(self.sizes))

    @property
    def feature_size(self) -> int:
        """
        Width of one flattened input row.
        """
        if self.kind == AUTOENCODER:
            return self.sizes[0]
        return self.steps * self.input_size

    @property
    def is_classifier(self) -> bool:
        return self.kind == STACKED_LSTM
