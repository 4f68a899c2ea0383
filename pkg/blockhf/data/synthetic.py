#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
Seeded stand-ins for MNIST, small enough for a laptop.
"""

import numpy as np

from ..linalg import Rng, seeded_uniform
from .dataset import TRAIN, Dataset


def _sigmoid(a: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * a))


def synth_autoencoder_data(n: int, dim: int, rank: int, seed: int, split: str = TRAIN) -> Dataset:
    """
    Samples x = σ(U z) lying near a rank-dimensional manifold, with U (dim × rank)
    and every z drawn uniformly from (−1, 1). Targets are the inputs.

    >>> synth_autoencoder_data(3, 2, 0, seed=1).inputs
    array([[0.5, 0.5],
           [0.5, 0.5],
           [0.5, 0.5]])
    """
    if not 0 <= rank <= dim:
        raise ValueError(f"need 0 <= rank <= dim, got rank={rank}, dim={dim}")
    if n < 1:
        raise ValueError(f"need at least one sample, got {n}")

    rng = Rng(seed)
    if rank == 0:
        x = np.full((n, dim), 0.5)
    else:
        U = seeded_uniform((dim, rank), -1.0, 1.0, rng)
        z = seeded_uniform((n, rank), -1.0, 1.0, rng)
        x = _sigmoid(z @ U.T)
    return Dataset(x, x, split)


def synth_sequence_data(
    n: int,
    steps: int,
    features: int,
    classes: int,
    seed: int,
    noise: float = 0.3,
    split: str = TRAIN,
) -> Dataset:
    """
    Sequence classification: every class has a prototype sequence in [0, 1]; a
    sample is its class prototype plus uniform noise, clipped to [0, 1].
    Inputs are n × steps × features, targets integer labels.
    """
    if min(n, steps, features) < 1 or classes < 2:
        raise ValueError("need n, steps, features >= 1 and at least two classes")

    rng = Rng(seed)
    prototypes = seeded_uniform((classes, steps, features), 0.0, 1.0, rng)
    labels = rng.integers(classes, size=n).astype(np.int64)
    jitter = seeded_uniform((n, steps, features), -noise, noise, rng) if noise > 0 else 0.0
    x = np.clip(prototypes[labels] + jitter, 0.0, 1.0)
    return Dataset(x, labels, split)
