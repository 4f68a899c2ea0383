#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
Splitting the parameter vector into blocks, w = [w_(1); …; w_(B)].

Blocks are made of whole parameter leaves. Within a block, indices follow the
flattening order, so a block of consecutive leaves is a plain range.
"""

import re
from collections import OrderedDict
from typing import Callable, Dict, List, Sequence, Tuple

import attr
import numpy as np

from ..autodiff.graph import LeafSlot
from ..errors import ConfigError, ShapeMismatchError
from ..linalg import DTYPE


@attr.s(auto_attribs=True, frozen=True)
class Block:
    name: str
    leaves: Tuple[str, ...] = attr.ib(converter=tuple)


@attr.s(frozen=True, eq=False)
class BlockPartition:
    blocks: Tuple[Block, ...] = attr.ib(converter=tuple)
    layout: Tuple[LeafSlot, ...] = attr.ib(converter=tuple)
    _indices: Tuple[np.ndarray, ...] = attr.ib(init=False)

    def __attrs_post_init__(self) -> None:
        if not self.blocks:
            raise ConfigError("a partition needs at least one block")
        owner: Dict[str, str] = {}
        known = {slot.name for slot in self.layout}
        for block in self.blocks:
            if not block.leaves:
                raise ConfigError(f"block {block.name!r} is empty")
            for leaf in block.leaves:
                if leaf not in known:
                    raise ConfigError(f"block {block.name!r} names unknown parameter {leaf!r}")
                if leaf in owner:
                    raise ConfigError(
                        f"parameter {leaf!r} is in both {owner[leaf]!r} and {block.name!r}"
                    )
                owner[leaf] = block.name
        missing = [name for name in known if name not in owner]
        if missing:
            raise ConfigError(f"parameters not in any block: {', '.join(sorted(missing))}")

        indices = []
        for block in self.blocks:
            members = set(block.leaves)
            ranges = [
                np.arange(slot.offset, slot.stop)
                for slot in self.layout
                if slot.name in members
            ]
            indices.append(np.concatenate(ranges))
        object.__setattr__(self, "_indices", tuple(indices))

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def names(self) -> List[str]:
        return [block.name for block in self.blocks]

    @property
    def dimension(self) -> int:
        return self.layout[-1].stop if self.layout else 0

    def indices(self, b: int) -> np.ndarray:
        return self._indices[b]

    def size(self, b: int) -> int:
        return self._indices[b].size

    def ranges(self, b: int) -> List[Tuple[int, int]]:
        """
        The block's indices as maximal [start, stop) runs.

        >>> from blockhf.autodiff.graph import LeafSlot
        >>> layout = [LeafSlot("a", 0, (2,)), LeafSlot("b", 2, (3,)), LeafSlot("c", 5, (1,))]
        >>> BlockPartition([Block("ac", ["a", "c"]), Block("b", ["b"])], layout).ranges(0)
        [(0, 2), (5, 6)]
        """
        runs: List[Tuple[int, int]] = []
        for index in self._indices[b].tolist():
            if runs and runs[-1][1] == index:
                runs[-1] = (runs[-1][0], index + 1)
            else:
                runs.append((index, index + 1))
        return runs

    def restrict(self, vector: np.ndarray, b: int) -> np.ndarray:
        """
        The entries of a full-length vector that belong to block b.
        """
        if vector.shape != (self.dimension,):
            raise ShapeMismatchError("restrict", vector.shape, (self.dimension,))
        return vector[self._indices[b]]

    def embed(self, block_vector: np.ndarray, b: int) -> np.ndarray:
        """
        A full-length vector holding block_vector at block b and zeros elsewhere.
        """
        if block_vector.shape != (self.size(b),):
            raise ShapeMismatchError("embed", block_vector.shape, (self.size(b),))
        full = np.zeros(self.dimension, dtype=DTYPE)
        full[self._indices[b]] = block_vector
        return full

    def aggregate(self, block_vectors: Sequence[np.ndarray]) -> np.ndarray:
        """
        [Δw_(1); …; Δw_(B)] placed back in flattening order.
        """
        full = np.zeros(self.dimension, dtype=DTYPE)
        for b, block_vector in enumerate(block_vectors):
            full[self._indices[b]] = block_vector
        return full


def layer_of(leaf: str) -> str:
    """
    >>> layer_of("encoder.2.W")
    'encoder.2'
    >>> layer_of("head.b")
    'head'
    """
    return leaf.rsplit(".", 1)[0]


def single(layout: Sequence[LeafSlot]) -> BlockPartition:
    """
    B = 1: ordinary Hessian-free.
    """
    return BlockPartition([Block("all", [slot.name for slot in layout])], layout)


def by_prefix(layout: Sequence[LeafSlot], key: Callable[[str], str]) -> BlockPartition:
    groups: "OrderedDict[str, List[str]]" = OrderedDict()
    for slot in layout:
        groups.setdefault(key(slot.name), []).append(slot.name)
    return BlockPartition([Block(name, leaves) for name, leaves in groups.items()], layout)


def layerwise(layout: Sequence[LeafSlot]) -> BlockPartition:
    """
    One block per layer.
    """
    return by_prefix(layout, layer_of)


def encoder_decoder(layout: Sequence[LeafSlot]) -> BlockPartition:
    if not any(slot.name.startswith("encoder.") for slot in layout):
        raise ConfigError("the model has no encoder/decoder parameters", key="optimizer.partition")
    return by_prefix(layout, lambda name: name.split(".", 1)[0])


def lstm_layers(layout: Sequence[LeafSlot]) -> BlockPartition:
    """
    One block per LSTM layer; the top layer's block also holds the output layer.
    """
    layers = sorted(
        {int(name.split(".")[1]) for name in (s.name for s in layout) if name.startswith("lstm.")}
    )
    if not layers:
        raise ConfigError("the model has no LSTM layers", key="optimizer.partition")
    top = f"lstm.{layers[-1]}"

    def key(name: str) -> str:
        return top if name.startswith("head.") else layer_of(name)

    return by_prefix(layout, key)


def balanced(layout: Sequence[LeafSlot], k: int) -> BlockPartition:
    """
    k blocks of consecutive leaves with roughly equal parameter counts.
    """
    layout = list(layout)
    if not 1 <= k <= len(layout):
        raise ConfigError(
            f"cannot make {k} blocks out of {len(layout)} parameters", key="optimizer.partition"
        )
    total = sum(slot.size for slot in layout)
    groups: List[List[str]] = [[]]
    seen = 0
    for position, slot in enumerate(layout):
        leaves_left = len(layout) - position
        blocks_to_open = k - len(groups)
        if groups[-1] and blocks_to_open > 0 and (
            leaves_left == blocks_to_open or seen >= total * len(groups) / k
        ):
            groups.append([])
        groups[-1].append(slot.name)
        seen += slot.size
    return BlockPartition(
        [Block(f"block{i}", leaves) for i, leaves in enumerate(groups)], layout
    )


PARTITION_PRESETS: Dict[str, Callable[[Sequence[LeafSlot]], BlockPartition]] = {
    "single": single,
    "autoencoder-2block": encoder_decoder,
    "lstm-3block": lstm_layers,
    "layerwise": layerwise,
}

BALANCED = re.compile(r"^balanced-(\d+)$")


def partition_preset(name: str, layout: Sequence[LeafSlot]) -> BlockPartition:
    """
    Looks up a named partition. "balanced-<k>" makes k roughly equal blocks.
    """
    if name in PARTITION_PRESETS:
        return PARTITION_PRESETS[name](layout)
    if match := BALANCED.match(name):
        return balanced(layout, int(match.group(1)))
    raise ConfigError(
        f"unknown partition {name!r}; choose from "
        f"{', '.join(sorted(PARTITION_PRESETS))} or balanced-<k>",
        key="optimizer.partition",
    )
