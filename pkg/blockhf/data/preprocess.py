#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
Image preprocessing: downsampling and turning images into sequences.

Every function accepts a single image (H × W) or a stack of them (n × H × W).
"""

from typing import Tuple

import numpy as np

from ..errors import ShapeMismatchError

# Sequentialization modes
PIXELS = "pixels"
ROWS = "rows"
MODES = (PIXELS, ROWS)


def avg_pool(img: np.ndarray, k: int) -> np.ndarray:
    """
    Means of non-overlapping k × k windows.

    >>> avg_pool(np.arange(16.0).reshape(4, 4), 4)
    array([[7.5]])
    >>> avg_pool(np.arange(16.0).reshape(4, 4), 2)
    array([[ 2.5,  4.5],
           [10.5, 12.5]])
    """
    if k < 1:
        raise ValueError(f"window size must be positive, got {k}")
    if img.ndim < 2:
        raise ShapeMismatchError("avg_pool", img.shape, ("height", "width"))
    *leading, height, width = img.shape
    if height % k or width % k:
        raise ShapeMismatchError("avg_pool", (height, width), (k, k))
    windows = img.reshape(*leading, height // k, k, width // k, k)
    return windows.mean(axis=(-3, -1))


def sequence_shape(height: int, width: int, mode: str = PIXELS) -> Tuple[int, int]:
    """
    (steps, features) of a sequentialized image.

    >>> sequence_shape(7, 7)
    (49, 1)
    >>> sequence_shape(7, 7, ROWS)
    (7, 7)
    """
    if mode == PIXELS:
        return height * width, 1
    elif mode == ROWS:
        return height, width
    raise ValueError(f"unknown sequentialization mode {mode!r}; choose from {MODES}")


def sequentialize(img: np.ndarray, mode: str = PIXELS) -> np.ndarray:
    """
    Scans an image row-major into a sequence of steps × features.

    >>> sequentialize(np.array([[1.0, 2.0], [3.0, 4.0]])).ravel()
    array([1., 2., 3., 4.])
    """
    if img.ndim < 2:
        raise ShapeMismatchError("sequentialize", img.shape, ("height", "width"))
    *leading, height, width = img.shape
    if height != width:
        raise ShapeMismatchError("sequentialize", (height, width), (height, height))
    return img.reshape(*leading, *sequence_shape(height, width, mode))


def desequentialize(seq: np.ndarray, side: int) -> np.ndarray:
    """
    The inverse of sequentialize for a side × side image, either mode.
    """
    if seq.ndim < 2 or seq.shape[-2] * seq.shape[-1] != side * side:
        raise ShapeMismatchError("desequentialize", seq.shape, (side, side))
    return seq.reshape(*seq.shape[:-2], side, side)
