#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
Computation graphs built from a fixed set of primitives.

A Graph is an immutable, topologically ordered list of nodes. Parameter leaves are
registered in order, and that order fixes the canonical flattening of the
parameter vector: the first registered leaf sits at offset 0.

Graphs are made with a GraphBuilder:

    >>> builder = GraphBuilder()
    >>> x = builder.input("x")
    >>> W = builder.parameter("W", (3, 2), Uniform(0.5))
    >>> z = builder.tanh(builder.matmul(x, W))
    >>> graph = builder.build(output=z, loss=builder.mse_loss(z, builder.input("y")))
    >>> graph.size
    6
    >>> [slot.name for slot in graph.layout]
    ['W']
"""

import math
from typing import Dict, List, Optional, Sequence, Tuple, Union

import attr
import numpy as np

from ..errors import GraphError
from ..linalg import DTYPE, Rng, Shape, seeded_uniform
from .losses import LOSS_KINDS, MSE, SOFTMAX_XENT

PARAMETER = "parameter"
INPUT = "input"
LEAF_KINDS = frozenset((PARAMETER, INPUT))


@attr.s(auto_attribs=True, frozen=True)
class Uniform:
    """
    Draws from uniform(-bound, bound).
    """

    bound: float

    def sample(self, shape: Shape, rng: Rng) -> np.ndarray:
        if self.bound == 0:
            return np.zeros(shape, dtype=DTYPE)
        return seeded_uniform(shape, -self.bound, self.bound, rng)


@attr.s(auto_attribs=True, frozen=True)
class Constant:
    value: float = 0.0

    def sample(self, shape: Shape, rng: Rng) -> np.ndarray:
        return np.full(shape, self.value, dtype=DTYPE)


Initializer = Union[Uniform, Constant]


@attr.s(auto_attribs=True, frozen=True)
class LeafSlot:
    """
    Where a parameter leaf lives in the flattened parameter vector.
    """

    name: str
    offset: int
    shape: Shape

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    @property
    def stop(self) -> int:
        return self.offset + self.size

    def take(self, flat: np.ndarray) -> np.ndarray:
        return flat[self.offset : self.stop].reshape(self.shape)


@attr.s(auto_attribs=True, frozen=True)
class Ref:
    """
    A handle to a node under construction.
    """

    index: int


@attr.s(auto_attribs=True, frozen=True)
class Node:
    index: int
    kind: str
    inputs: Tuple[int, ...] = ()
    name: Optional[str] = None
    params: Tuple = ()


@attr.s(frozen=True)
class Graph:
    nodes: Tuple[Node, ...] = attr.ib()
    parameters: Tuple[int, ...] = attr.ib()
    layout: Tuple[LeafSlot, ...] = attr.ib()
    initializers: Tuple[Initializer, ...] = attr.ib()
    inputs: Dict[str, int] = attr.ib()
    output: int = attr.ib()
    loss: int = attr.ib()

    def __attrs_post_init__(self) -> None:
        for node in self.nodes:
            if any(i >= node.index for i in node.inputs):
                raise GraphError(f"node {node.index} ({node.kind}) is not topologically ordered")

    @property
    def size(self) -> int:
        """
        Total number of trainable parameters.
        """
        if not self.layout:
            return 0
        return self.layout[-1].stop

    @property
    def loss_kind(self) -> str:
        kind = self.nodes[self.loss].kind
        if kind not in LOSS_KINDS:
            raise GraphError(f"loss node is {kind!r}, not one of {sorted(LOSS_KINDS)}")
        return kind

    @property
    def target(self) -> int:
        """
        The node holding the targets the loss compares the output against.
        """
        loss_node = self.nodes[self.loss]
        if loss_node.kind not in LOSS_KINDS or loss_node.inputs[0] != self.output:
            raise GraphError("the loss node does not consume the output node")
        return loss_node.inputs[1]

    def slot(self, name: str) -> LeafSlot:
        for slot in self.layout:
            if slot.name == name:
                return slot
        raise KeyError(name)

    def init_params(self, rng: Rng) -> np.ndarray:
        """
        Draws a fresh flat parameter vector, leaf by leaf in registration order.
        """
        if not self.layout:
            return np.zeros(0, dtype=DTYPE)
        return np.concatenate(
            [
                init.sample(slot.shape, rng).ravel()
                for slot, init in zip(self.layout, self.initializers)
            ]
        )

    def depends_on_parameters(self) -> List[bool]:
        """
        For every node: does its value change with w?
        """
        flags = [False] * len(self.nodes)
        for node in self.nodes:
            if node.kind == PARAMETER:
                flags[node.index] = True
            elif node.kind != INPUT:
                flags[node.index] = any(flags[i] for i in node.inputs)
        return flags


class GraphBuilder:
    """
    Records primitive operations in the order they are requested, which is
    necessarily a topological order.
    """

    def __init__(self) -> None:
        self._nodes: List[Node] = []
        self._parameters: List[int] = []
        self._layout: List[LeafSlot] = []
        self._initializers: List[Initializer] = []
        self._inputs: Dict[str, int] = {}
        self._offset = 0

    def _add(self, kind: str, *inputs: Ref, name=None, params=()) -> Ref:
        index = len(self._nodes)
        self._nodes.append(
            Node(
                index=index,
                kind=kind,
                inputs=tuple(r.index for r in inputs),
                name=name,
                params=tuple(params),
            )
        )
        return Ref(index)

    # Leaves

    def parameter(self, name: str, shape: Sequence[int], init: Initializer) -> Ref:
        shape = tuple(int(d) for d in shape)
        if any(d <= 0 for d in shape):
            raise GraphError(f"parameter {name!r} has a non-positive dimension: {shape}")
        if any(slot.name == name for slot in self._layout):
            raise GraphError(f"parameter {name!r} registered twice")
        ref = self._add(PARAMETER, name=name, params=shape)
        slot = LeafSlot(name=name, offset=self._offset, shape=shape)
        self._offset = slot.stop
        self._parameters.append(ref.index)
        self._layout.append(slot)
        self._initializers.append(init)
        return ref

    def input(self, name: str) -> Ref:
        """
        An input leaf, bound by name at every evaluation. Asking twice for the same
        name returns the same leaf.
        """
        if name in self._inputs:
            return Ref(self._inputs[name])
        ref = self._add(INPUT, name=name)
        self._inputs[name] = ref.index
        return ref

    # Primitives

    def matmul(self, a: Ref, b: Ref) -> Ref:
        return self._add("matmul", a, b)

    def add(self, a: Ref, b: Ref) -> Ref:
        """
        a + b; b may also be a bias broadcast over the leading axis of a.
        """
        return self._add("add", a, b)

    def mul(self, a: Ref, b: Ref) -> Ref:
        """
        Elementwise a ⊙ b; b may be a vector broadcast over the leading axis of a.
        """
        return self._add("mul", a, b)

    def tanh(self, a: Ref) -> Ref:
        return self._add("tanh", a)

    def sigmoid(self, a: Ref) -> Ref:
        return self._add("sigmoid", a)

    def slice(self, a: Ref, start: int, stop: int) -> Ref:
        """
        Columns [start, stop) of the last axis.
        """
        if not 0 <= start < stop:
            raise GraphError(f"empty or negative slice [{start}:{stop}]")
        return self._add("slice", a, params=(start, stop))

    def concat(self, *parts: Ref) -> Ref:
        """
        Joins along the last axis.
        """
        if not parts:
            raise GraphError("concat needs at least one operand")
        return self._add("concat", *parts)

    def mean(self, a: Ref) -> Ref:
        """
        Mean over the batch (leading) axis.
        """
        return self._add("mean", a)

    def mse_loss(self, z: Ref, y: Ref) -> Ref:
        """
        Batch mean of ½‖z − y‖².
        """
        return self._add(MSE, z, y)

    def softmax_xent(self, z: Ref, labels: Ref) -> Ref:
        """
        Batch mean of −log softmax(z)[label].
        """
        return self._add(SOFTMAX_XENT, z, labels)

    def build(self, output: Ref, loss: Ref) -> Graph:
        return Graph(
            nodes=tuple(self._nodes),
            parameters=tuple(self._parameters),
            layout=tuple(self._layout),
            initializers=tuple(self._initializers),
            inputs=dict(self._inputs),
            output=output.index,
            loss=loss.index,
        )
