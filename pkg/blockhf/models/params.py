#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
The flattened parameter vector w and its layout.
"""

from typing import Dict, Mapping, Tuple

import attr
import numpy as np

from ..autodiff.graph import Graph, LeafSlot
from ..errors import ShapeMismatchError
from ..linalg import DTYPE, Rng


def _check_layout(instance, attribute, layout: Tuple[LeafSlot, ...]) -> None:
    offset = 0
    for slot in layout:
        if slot.offset != offset:
            raise ValueError(f"leaf {slot.name!r} starts at {slot.offset}, expected {offset}")
        offset = slot.stop


@attr.s(frozen=True, eq=False)
class ParamVector:
    """
    A flat float64 vector plus the (name, offset, shape) of every leaf in it.
    Leaves are contiguous, do not overlap, and cover the whole vector.
    """

    values: np.ndarray = attr.ib(converter=lambda v: np.asarray(v, dtype=DTYPE))
    layout: Tuple[LeafSlot, ...] = attr.ib(converter=tuple, validator=_check_layout)

    def __attrs_post_init__(self) -> None:
        expected = self.layout[-1].stop if self.layout else 0
        if self.values.ndim != 1 or self.values.size != expected:
            raise ShapeMismatchError("parameter vector", self.values.shape, (expected,))

    def __len__(self) -> int:
        return self.values.size

    def leaf(self, name: str) -> np.ndarray:
        for slot in self.layout:
            if slot.name == name:
                return slot.take(self.values)
        raise KeyError(name)

    def replace(self, values: np.ndarray) -> "ParamVector":
        """
        Same layout, new values.
        """
        return ParamVector(values, self.layout)


def flatten(graph: Graph, tensors: Mapping[str, np.ndarray]) -> ParamVector:
    """
    Packs per-leaf tensors into one vector, in the graph's registration order.
    """
    pieces = []
    for slot in graph.layout:
        if slot.name not in tensors:
            raise KeyError(f"no tensor for parameter {slot.name!r}")
        tensor = np.asarray(tensors[slot.name], dtype=DTYPE)
        if tensor.shape != slot.shape:
            raise ShapeMismatchError(slot.name, tensor.shape, slot.shape)
        pieces.append(tensor.ravel())
    values = np.concatenate(pieces) if pieces else np.zeros(0, dtype=DTYPE)
    return ParamVector(values, graph.layout)


def unflatten(pv: ParamVector) -> Dict[str, np.ndarray]:
    """
    Splits the vector back into one tensor per leaf.
    """
    return {slot.name: slot.take(pv.values).copy() for slot in pv.layout}


def initial_parameters(graph: Graph, rng: Rng) -> ParamVector:
    return ParamVector(graph.init_params(rng), graph.layout)


def zeros_like_graph(graph: Graph) -> ParamVector:
    return ParamVector(np.zeros(graph.size, dtype=DTYPE), graph.layout)
