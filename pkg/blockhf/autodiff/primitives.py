#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
Differentiation rules for every primitive a Graph may contain.

Each primitive knows four things:

    forward(xs)                        the value
    tangent(xs, dxs)                   the R-operator: directional derivative
    vjp(xs, cot)                       the L-operator: vector-Jacobian product
    tangent_vjp(xs, dxs, tangent_cot)  the adjoint of the tangent rule with
                                       respect to the primal inputs

The last one is what makes reverse-over-forward work: when the reverse pass runs
through the tangent computation, the tangent rule's dependence on the primal
values contributes extra adjoints to those values. Linear primitives have none.

Tangents are None when an input does not depend on the parameters; rules treat
None as zero. vjp and tangent_vjp take a `needs` flag per input and return None
for inputs whose adjoint nobody needs.
"""

from typing import Dict, List, Optional, Sequence

import numpy as np

from ..errors import GraphError, ShapeMismatchError
from .graph import Node
from .losses import MSE, SOFTMAX_XENT, log_softmax, loss_output_hessian_apply, softmax

Array = np.ndarray
MaybeArray = Optional[np.ndarray]


def _unbroadcast(cot: Array, shape) -> Array:
    """
    Sums a cotangent over the leading axes that broadcasting added.
    """
    if cot.shape == tuple(shape):
        return cot
    extra = cot.ndim - len(shape)
    return cot.sum(axis=tuple(range(extra)))


def _check_broadcast(operation: str, a: Array, b: Array) -> None:
    if a.shape == b.shape:
        return
    if b.ndim < a.ndim and a.shape[a.ndim - b.ndim :] == b.shape:
        return
    raise ShapeMismatchError(operation, a.shape, b.shape)


def _batch_size(operation: str, z: Array) -> int:
    if z.ndim != 2 or z.shape[0] == 0:
        raise ShapeMismatchError(operation, z.shape, ("batch", "features"))
    return z.shape[0]


class Primitive:
    kind = "?"

    def forward(self, node: Node, xs: Sequence[Array]) -> Array:
        raise NotImplementedError

    def tangent(
        self, node: Node, xs: Sequence[Array], dxs: Sequence[MaybeArray], out: Array
    ) -> Array:
        raise NotImplementedError

    def vjp(
        self,
        node: Node,
        xs: Sequence[Array],
        out: Array,
        cot: Array,
        needs: Sequence[bool],
    ) -> List[MaybeArray]:
        raise NotImplementedError

    def tangent_vjp(
        self,
        node: Node,
        xs: Sequence[Array],
        dxs: Sequence[MaybeArray],
        out: Array,
        dout: Array,
        tangent_cot: Array,
        needs: Sequence[bool],
    ) -> List[MaybeArray]:
        return [None] * len(xs)


class MatMul(Primitive):
    kind = "matmul"

    def forward(self, node, xs):
        a, b = xs
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
            raise ShapeMismatchError("matmul", a.shape, b.shape)
        return a @ b

    def tangent(self, node, xs, dxs, out):
        a, b = xs
        da, db = dxs
        result = np.zeros_like(out)
        if da is not None:
            result += da @ b
        if db is not None:
            result += a @ db
        return result

    def vjp(self, node, xs, out, cot, needs):
        a, b = xs
        return [
            cot @ b.T if needs[0] else None,
            a.T @ cot if needs[1] else None,
        ]

    def tangent_vjp(self, node, xs, dxs, out, dout, tangent_cot, needs):
        # d(da·b + a·db): a sees db, b sees da
        da, db = dxs
        return [
            tangent_cot @ db.T if needs[0] and db is not None else None,
            da.T @ tangent_cot if needs[1] and da is not None else None,
        ]


class Add(Primitive):
    kind = "add"

    def forward(self, node, xs):
        a, b = xs
        _check_broadcast("add", a, b)
        return a + b

    def tangent(self, node, xs, dxs, out):
        result = np.zeros_like(out)
        for dx in dxs:
            if dx is not None:
                result += dx
        return result

    def vjp(self, node, xs, out, cot, needs):
        return [_unbroadcast(cot, x.shape) if need else None for x, need in zip(xs, needs)]


class Mul(Primitive):
    kind = "mul"

    def forward(self, node, xs):
        a, b = xs
        _check_broadcast("mul", a, b)
        return a * b

    def tangent(self, node, xs, dxs, out):
        a, b = xs
        da, db = dxs
        result = np.zeros_like(out)
        if da is not None:
            result += da * b
        if db is not None:
            result += a * db
        return result

    def vjp(self, node, xs, out, cot, needs):
        a, b = xs
        return [
            _unbroadcast(cot * b, a.shape) if needs[0] else None,
            _unbroadcast(cot * a, b.shape) if needs[1] else None,
        ]

    def tangent_vjp(self, node, xs, dxs, out, dout, tangent_cot, needs):
        a, b = xs
        da, db = dxs
        return [
            _unbroadcast(tangent_cot * db, a.shape)
            if needs[0] and db is not None
            else None,
            _unbroadcast(tangent_cot * da, b.shape)
            if needs[1] and da is not None
            else None,
        ]


class Tanh(Primitive):
    kind = "tanh"

    def forward(self, node, xs):
        return np.tanh(xs[0])

    def tangent(self, node, xs, dxs, out):
        return (1.0 - out * out) * dxs[0]

    def vjp(self, node, xs, out, cot, needs):
        return [cot * (1.0 - out * out) if needs[0] else None]

    def tangent_vjp(self, node, xs, dxs, out, dout, tangent_cot, needs):
        (da,) = dxs
        if not needs[0] or da is None:
            return [None]
        # d/da (1 - tanh²a) = -2 tanh(a) (1 - tanh²a)
        return [tangent_cot * da * (-2.0 * out * (1.0 - out * out))]


class Sigmoid(Primitive):
    kind = "sigmoid"

    def forward(self, node, xs):
        # Written through tanh so that large |a| never overflows.
        return 0.5 * (1.0 + np.tanh(0.5 * xs[0]))

    def tangent(self, node, xs, dxs, out):
        return out * (1.0 - out) * dxs[0]

    def vjp(self, node, xs, out, cot, needs):
        return [cot * out * (1.0 - out) if needs[0] else None]

    def tangent_vjp(self, node, xs, dxs, out, dout, tangent_cot, needs):
        (da,) = dxs
        if not needs[0] or da is None:
            return [None]
        return [tangent_cot * da * out * (1.0 - out) * (1.0 - 2.0 * out)]


class Slice(Primitive):
    kind = "slice"

    def forward(self, node, xs):
        (a,) = xs
        start, stop = node.params
        if a.ndim == 0 or stop > a.shape[-1]:
            raise ShapeMismatchError("slice", a.shape, (start, stop))
        return a[..., start:stop]

    def tangent(self, node, xs, dxs, out):
        start, stop = node.params
        return dxs[0][..., start:stop]

    def vjp(self, node, xs, out, cot, needs):
        if not needs[0]:
            return [None]
        start, stop = node.params
        full = np.zeros_like(xs[0])
        full[..., start:stop] = cot
        return [full]


class Concat(Primitive):
    kind = "concat"

    def forward(self, node, xs):
        leading = {x.shape[:-1] for x in xs}
        if len(leading) != 1:
            shapes = [x.shape for x in xs]
            raise ShapeMismatchError("concat", shapes[0], shapes[1])
        return np.concatenate(xs, axis=-1)

    def tangent(self, node, xs, dxs, out):
        return np.concatenate(
            [dx if dx is not None else np.zeros_like(x) for x, dx in zip(xs, dxs)],
            axis=-1,
        )

    def vjp(self, node, xs, out, cot, needs):
        result: List[MaybeArray] = []
        offset = 0
        for x, need in zip(xs, needs):
            width = x.shape[-1]
            result.append(cot[..., offset : offset + width] if need else None)
            offset += width
        return result


class Mean(Primitive):
    kind = "mean"

    def forward(self, node, xs):
        (a,) = xs
        if a.ndim == 0 or a.shape[0] == 0:
            raise ShapeMismatchError("mean", a.shape, ("batch", "..."))
        return np.mean(a, axis=0)

    def tangent(self, node, xs, dxs, out):
        return np.mean(dxs[0], axis=0)

    def vjp(self, node, xs, out, cot, needs):
        if not needs[0]:
            return [None]
        (a,) = xs
        return [np.broadcast_to(cot / a.shape[0], a.shape).copy()]


class MeanSquaredError(Primitive):
    """
    Batch mean of ½‖z − y‖².
    """

    kind = MSE

    def forward(self, node, xs):
        z, y = xs
        if z.shape != y.shape:
            raise ShapeMismatchError("mse", z.shape, y.shape)
        n = _batch_size("mse", z)
        diff = z - y
        return np.array(0.5 * np.sum(diff * diff) / n)

    @staticmethod
    def _dz_minus_dy(xs, dxs):
        z, y = xs
        dz, dy = dxs
        d = np.zeros_like(z) if dz is None else dz
        return d if dy is None else d - dy

    def tangent(self, node, xs, dxs, out):
        z, y = xs
        n = z.shape[0]
        return np.array(np.sum((z - y) * self._dz_minus_dy(xs, dxs)) / n)

    def vjp(self, node, xs, out, cot, needs):
        z, y = xs
        g = cot * (z - y) / z.shape[0]
        return [g if needs[0] else None, -g if needs[1] else None]

    def tangent_vjp(self, node, xs, dxs, out, dout, tangent_cot, needs):
        z, _ = xs
        h = tangent_cot * self._dz_minus_dy(xs, dxs) / z.shape[0]
        return [h if needs[0] else None, -h if needs[1] else None]


class SoftmaxCrossEntropy(Primitive):
    """
    Batch mean of −log softmax(z)[label]. The labels are integers and never
    differentiated.
    """

    kind = SOFTMAX_XENT

    @staticmethod
    def _labels(z, labels):
        n = _batch_size("softmax_xent", z)
        labels = np.asarray(labels).astype(np.int64).ravel()
        if labels.size != n:
            raise ShapeMismatchError("softmax_xent", z.shape, labels.shape)
        if labels.size and (labels.min() < 0 or labels.max() >= z.shape[1]):
            raise GraphError(f"labels out of range for {z.shape[1]} classes")
        return labels

    def _residual(self, z, labels):
        labels = self._labels(z, labels)
        residual = softmax(z)
        residual[np.arange(labels.size), labels] -= 1.0
        return residual

    def forward(self, node, xs):
        z, labels = xs
        labels = self._labels(z, labels)
        picked = log_softmax(z)[np.arange(labels.size), labels]
        return np.array(-np.sum(picked) / z.shape[0])

    def tangent(self, node, xs, dxs, out):
        z, labels = xs
        dz = dxs[0]
        if dz is None:
            return np.zeros_like(out)
        return np.array(np.sum(self._residual(z, labels) * dz) / z.shape[0])

    def vjp(self, node, xs, out, cot, needs):
        z, labels = xs
        if not needs[0]:
            return [None, None]
        return [cot * self._residual(z, labels) / z.shape[0], None]

    def tangent_vjp(self, node, xs, dxs, out, dout, tangent_cot, needs):
        z, labels = xs
        dz = dxs[0]
        if not needs[0] or dz is None:
            return [None, None]
        curvature = loss_output_hessian_apply(SOFTMAX_XENT, z, labels, dz)
        return [tangent_cot * curvature / z.shape[0], None]


PRIMITIVES: Dict[str, Primitive] = {
    primitive.kind: primitive
    for primitive in (
        MatMul(),
        Add(),
        Mul(),
        Tanh(),
        Sigmoid(),
        Slice(),
        Concat(),
        Mean(),
        MeanSquaredError(),
        SoftmaxCrossEntropy(),
    )
}
