#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
Mini-batch sampling: a gradient batch S_g and a curvature batch S_c ⊆ S_g.
"""

import logging
from typing import Iterator, Sized

import attr
import numpy as np

from ..linalg import Rng

logger = logging.getLogger(__name__)


@attr.s(auto_attribs=True, frozen=True, eq=False)
class BatchPair:
    """
    Indices into a Dataset. The curvature batch is a prefix of the gradient batch.
    """

    gradient: np.ndarray
    curvature: np.ndarray
    epoch: int = 0

    def __attrs_post_init__(self) -> None:
        n = len(self.curvature)
        if n > len(self.gradient) or not np.array_equal(self.curvature, self.gradient[:n]):
            raise ValueError("curvature batch must be a prefix of the gradient batch")


def sample_batches(
    dataset: Sized, gradient_batch: int, curvature_batch: int, rng: Rng
) -> Iterator[BatchPair]:
    """
    An endless stream of batch pairs. Every epoch shuffles the indices and cuts
    them into consecutive chunks of gradient_batch; a short final chunk is
    dropped. The curvature batch is the first curvature_batch indices of a chunk.
    """
    n = len(dataset)
    if not 0 < gradient_batch <= n:
        raise ValueError(f"gradient batch of {gradient_batch} from {n} samples")
    if not 0 < curvature_batch <= gradient_batch:
        raise ValueError(
            f"curvature batch of {curvature_batch} from a gradient batch of {gradient_batch}"
        )

    per_epoch = n // gradient_batch
    if n % gradient_batch:
        logger.debug("dropping %d samples per epoch", n % gradient_batch)

    epoch = 0
    while True:
        order = rng.permutation(n)
        for i in range(per_epoch):
            chunk = order[i * gradient_batch : (i + 1) * gradient_batch]
            yield BatchPair(chunk, chunk[:curvature_batch], epoch)
        epoch += 1
