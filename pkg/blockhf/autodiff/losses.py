#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
The two training losses and their Hessians with respect to the network output.

Per-sample conventions:

    MSE:                 ½‖z − y‖²           so H_ℓ = I
    softmax cross-entropy: −log softmax(z)[y]  so H_ℓ = diag(p) − p pᵀ, p = softmax(z)

The batch loss is the mean over samples (rows).
"""

import numpy as np

from ..errors import ShapeMismatchError

MSE = "mse"
SOFTMAX_XENT = "softmax_xent"
LOSS_KINDS = frozenset((MSE, SOFTMAX_XENT))


def softmax(z: np.ndarray) -> np.ndarray:
    """
    Row-wise softmax over the last axis.

    >>> softmax(np.zeros((1, 2)))
    array([[0.5, 0.5]])
    """
    shifted = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def log_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - np.max(z, axis=-1, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))


def one_hot(labels: np.ndarray, classes: int) -> np.ndarray:
    """
    >>> one_hot(np.array([1, 0]), 3)
    array([[0., 1., 0.],
           [1., 0., 0.]])
    """
    labels = np.asarray(labels).astype(np.int64).ravel()
    encoded = np.zeros((labels.size, classes), dtype=np.float64)
    encoded[np.arange(labels.size), labels] = 1.0
    return encoded


def loss_output_hessian_apply(
    loss_kind: str, z: np.ndarray, y: np.ndarray, u: np.ndarray
) -> np.ndarray:
    """
    Multiplies u by the per-sample Hessian of the loss with respect to the network
    output z, row by row.

    For softmax cross-entropy the Hessian does not depend on the targets, so y may
    be given either as integer labels or as one-hot rows.

    >>> u = np.array([[1.0, 0.0]])
    >>> loss_output_hessian_apply(SOFTMAX_XENT, np.zeros((1, 2)), np.array([0]), u)
    array([[ 0.25, -0.25]])
    """
    if z.shape != u.shape:
        raise ShapeMismatchError(f"{loss_kind} Hessian", z.shape, u.shape)

    if loss_kind == MSE:
        if y.shape != z.shape:
            raise ShapeMismatchError("mse Hessian", z.shape, y.shape)
        return u.copy()
    elif loss_kind == SOFTMAX_XENT:
        p = softmax(z)
        pu = np.sum(p * u, axis=-1, keepdims=True)
        return p * u - p * pu
    raise ValueError(f"unknown loss kind: {loss_kind!r}")
