#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
Dense float64 kernels and the seeded random generator used everywhere else.

Tensors are plain float64 numpy arrays. The helpers in this module check shapes
up front and raise ShapeMismatchError naming both operands instead of letting
numpy broadcast something unintended.
"""

import math
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

from .errors import NumericalError, ShapeMismatchError

Shape = Tuple[int, ...]
Tensor = np.ndarray

DTYPE = np.float64


def as_tensor(values, shape: Union[None, Sequence[int]] = None) -> Tensor:
    """
    Coerces values into a float64 array, optionally reshaped.

    >>> as_tensor([1, 2, 3]).dtype
    dtype('float64')
    >>> as_tensor([1, 2, 3, 4], shape=(2, 2)).shape
    (2, 2)
    """
    tensor = np.asarray(values, dtype=DTYPE)
    if shape is not None:
        shape = tuple(shape)
        if math.prod(shape) != tensor.size:
            raise ShapeMismatchError("as_tensor", tensor.shape, shape)
        tensor = tensor.reshape(shape)
    return tensor


def dot(u: Tensor, v: Tensor) -> float:
    """
    Inner product of two vectors.

    The summation order is BLAS-defined. It is the same on every call for the same
    lengths, and agrees with a left-to-right sum to within rounding.

    >>> dot(as_tensor([1, 2, 3]), as_tensor([4, 5, 6]))
    32.0
    >>> dot(as_tensor([0.5, 0.5]), as_tensor([0.5, 0.5]))
    0.5
    """
    if u.shape != v.shape or u.ndim != 1:
        raise ShapeMismatchError("dot", u.shape, v.shape)
    return float(np.dot(u, v))


def gemm(a: Tensor, b: Tensor) -> Tensor:
    """
    Matrix product a · b of two rank-2 tensors, accumulated in whatever order the
    BLAS kernel uses. Repeated calls on the same operands give the same bits.

    >>> gemm(as_tensor([[1, 2], [3, 4]]), as_tensor([[1], [1]]))
    array([[3.],
           [7.]])
    """
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeMismatchError("gemm", a.shape, b.shape)
    return np.matmul(a, b)


def axpy(a: float, x: Tensor, y: Tensor) -> Tensor:
    """
    Returns a·x + y as a new tensor.

    >>> axpy(2.0, as_tensor([1, 1]), as_tensor([1, 0]))
    array([3., 2.])
    """
    if x.shape != y.shape:
        raise ShapeMismatchError("axpy", x.shape, y.shape)
    return a * x + y


def norm(x: Tensor) -> float:
    return math.sqrt(dot(x.ravel(), x.ravel()))


def ensure_finite(what: str, *tensors: Tensor, **diagnostics) -> None:
    """
    Raises NumericalError if any of the tensors holds NaN or infinity.
    """
    for tensor in tensors:
        if not np.all(np.isfinite(tensor)):
            raise NumericalError(f"non-finite values in {what}", diagnostics)


class Rng:
    """
    Seeded pseudo-random generator: numpy's PCG64 bit generator behind a small
    interface. The same seed yields the same stream on every platform.

    An Rng has a single owner. Concurrent tasks get their own via fork().
    """

    algorithm = "PCG64"

    def __init__(self, seed: int) -> None:
        if seed < 0:
            raise ValueError(f"seed must be non-negative, got {seed}")
        self.seed = seed
        self._generator = np.random.Generator(np.random.PCG64(seed))

    def uniform(self, shape: Iterable[int], lo: float, hi: float) -> Tensor:
        return self._generator.uniform(lo, hi, size=tuple(shape)).astype(DTYPE)

    def integers(self, hi: int, size: int) -> np.ndarray:
        return self._generator.integers(0, hi, size=size)

    def permutation(self, n: int) -> np.ndarray:
        """
        A Fisher–Yates shuffle of range(n).
        """
        return self._generator.permutation(n)

    def fork(self) -> "Rng":
        """
        A child generator seeded from this generator's stream.
        """
        return Rng(int(self._generator.integers(0, 2 ** 63 - 1)))

    def get_state(self) -> dict:
        return self._generator.bit_generator.state

    def set_state(self, state: dict) -> None:
        self._generator.bit_generator.state = state

    def __repr__(self) -> str:
        return f"Rng({self.algorithm}, seed={self.seed})"


def seeded_uniform(shape: Iterable[int], lo: float, hi: float, rng: Rng) -> Tensor:
    """
    Draws values in [lo, hi) from rng, advancing its state.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got lo={lo}, hi={hi}")
    return rng.uniform(shape, lo, hi)


def glorot_bound(fan_in: int, fan_out: int) -> float:
    """
    Half-width of the uniform initialization range for a weight matrix.

    >>> glorot_bound(3, 3)
    1.0
    """
    return math.sqrt(6.0 / (fan_in + fan_out))
