#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
Adam, the first-order baseline.
"""

import attr
import numpy as np

from ..errors import ShapeMismatchError
from ..linalg import ensure_finite
from .state import TrainerState


@attr.s(auto_attribs=True, frozen=True)
class AdamConfig:
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 64
    max_loops: int = 1000

    def __attrs_post_init__(self) -> None:
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        for name in ("beta1", "beta2"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ValueError(f"{name} must be in [0, 1), got {getattr(self, name)}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be at least 1, got {self.batch_size}")


def adam_step(state: TrainerState, g: np.ndarray, cfg: AdamConfig) -> TrainerState:
    n = len(state.w)
    if g.shape != (n,):
        raise ShapeMismatchError("adam gradient", g.shape, (n,))
    ensure_finite("gradient", g, update=state.k)

    m = state.adam_m if state.adam_m is not None else np.zeros(n)
    v = state.adam_v if state.adam_v is not None else np.zeros(n)
    t = state.adam_t + 1

    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g
    m_hat = m / (1.0 - cfg.beta1 ** t)
    v_hat = v / (1.0 - cfg.beta2 ** t)
    w = state.w.values - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)

    return attr.evolve(
        state, w=state.w.replace(w), adam_m=m, adam_v=v, adam_t=t, k=state.k + 1
    )
