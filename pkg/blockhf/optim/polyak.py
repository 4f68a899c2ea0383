#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

import numpy as np

from ..errors import ShapeMismatchError
from ..linalg import ensure_finite

DEFAULT_DECAY = 0.99


def polyak_update(avg: np.ndarray, w: np.ndarray, decay: float = DEFAULT_DECAY) -> np.ndarray:
    """
    Exponential moving average of the parameters: decay·avg + (1 − decay)·w.

    >>> polyak_update(np.zeros(2), np.ones(2))
    array([0.01, 0.01])
    >>> polyak_update(np.zeros(2), np.ones(2), decay=0.0)
    array([1., 1.])
    """
    if not 0.0 <= decay < 1.0:
        raise ValueError(f"decay must be in [0, 1), got {decay}")
    if avg.shape != w.shape:
        raise ShapeMismatchError("polyak_update", avg.shape, w.shape)
    ensure_finite("Polyak average input", w)
    if decay == 0.0:
        return np.array(w, copy=True)
    return decay * avg + (1.0 - decay) * w
