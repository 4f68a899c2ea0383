#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
Everything an optimizer carries from one update to the next.
"""

from typing import Optional, Tuple

import attr
import numpy as np

from ..errors import ShapeMismatchError
from ..linalg import DTYPE, Rng
from ..models.params import ParamVector
from .partition import BlockPartition


def _zeros(n: int) -> np.ndarray:
    return np.zeros(n, dtype=DTYPE)


@attr.s(auto_attribs=True, frozen=True, eq=False)
class TrainerState:
    """
    Single-owner optimizer state. Updates return a new state via attr.evolve;
    arrays are never modified in place.

    block_solutions holds each block's raw CG solution from the previous loop
    (before scaling by the learning rate); the next loop warm-starts from it.
    """

    w: ParamVector
    rng: Rng
    block_solutions: Tuple[np.ndarray, ...] = attr.ib(converter=tuple, default=())
    adam_m: Optional[np.ndarray] = None
    adam_v: Optional[np.ndarray] = None
    adam_t: int = 0
    polyak: Optional[np.ndarray] = None
    k: int = 0

    def __attrs_post_init__(self) -> None:
        n = len(self.w)
        if self.adam_t < 0:
            raise ValueError(f"Adam step counter must be non-negative, got {self.adam_t}")
        for name in ("adam_m", "adam_v", "polyak"):
            vector = getattr(self, name)
            if vector is not None and vector.shape != (n,):
                raise ShapeMismatchError(name, vector.shape, (n,))

    @classmethod
    def initial(
        cls,
        w: ParamVector,
        rng: Rng,
        partition: Optional[BlockPartition] = None,
        polyak: bool = False,
    ) -> "TrainerState":
        """
        A fresh state: zero block solutions and moments. The Polyak average, when
        kept, starts at w.
        """
        n = len(w)
        solutions: Tuple[np.ndarray, ...] = ()
        if partition is not None:
            if partition.dimension != n:
                raise ShapeMismatchError("partition", (partition.dimension,), (n,))
            solutions = tuple(_zeros(partition.size(b)) for b in range(len(partition)))
        return cls(
            w=w,
            rng=rng,
            block_solutions=solutions,
            adam_m=_zeros(n),
            adam_v=_zeros(n),
            # The average starts at w₀, not at zero.
            polyak=np.array(w.values, copy=True) if polyak else None,
        )

    def check_blocks(self, partition: BlockPartition) -> None:
        if len(self.block_solutions) != len(partition):
            raise ShapeMismatchError(
                "block solutions", (len(self.block_solutions),), (len(partition),)
            )
        for b, solution in enumerate(self.block_solutions):
            if solution.shape != (partition.size(b),):
                raise ShapeMismatchError(
                    f"block {partition.blocks[b].name} solution",
                    solution.shape,
                    (partition.size(b),),
                )

    @property
    def evaluation_parameters(self) -> ParamVector:
        """
        The Polyak average when one is kept, else w.
        """
        if self.polyak is None:
            return self.w
        return self.w.replace(self.polyak)
