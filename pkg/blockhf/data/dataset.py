#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

from typing import Dict, Tuple

import attr
import numpy as np

from ..errors import ShapeMismatchError

TRAIN = "train"
TEST = "test"
SPLITS = (TRAIN, TEST)


@attr.s(frozen=True, eq=False)
class Dataset:
    """
    Samples along axis 0. targets are integer labels for classification and
    reconstruction targets (usually the inputs themselves) for autoencoders.
    """

    inputs: np.ndarray = attr.ib()
    targets: np.ndarray = attr.ib()
    split: str = attr.ib(default=TRAIN, validator=attr.validators.in_(SPLITS))

    def __attrs_post_init__(self) -> None:
        if len(self.inputs) != len(self.targets):
            raise ShapeMismatchError("dataset", self.inputs.shape, self.targets.shape)

    def __len__(self) -> int:
        return len(self.inputs)

    @property
    def is_labelled(self) -> bool:
        return self.targets.dtype.kind in "iu"

    def feed(self, indices: np.ndarray) -> Dict[str, np.ndarray]:
        """
        The graph inputs for the given samples: "x" flattened to one row per
        sample, "y" as rows of targets or a vector of labels.
        """
        indices = np.asarray(indices, dtype=np.int64)
        x = self.inputs[indices].reshape(indices.size, -1)
        y = self.targets[indices]
        if not self.is_labelled:
            y = y.reshape(indices.size, -1)
        return {"x": x, "y": y}

    def everything(self) -> Dict[str, np.ndarray]:
        return self.feed(np.arange(len(self)))

    def head(self, n: int) -> "Dataset":
        """
        The first n samples.
        """
        return attr.evolve(self, inputs=self.inputs[:n], targets=self.targets[:n])

    def split_at(self, n: int) -> Tuple["Dataset", "Dataset"]:
        """
        The first n samples for training, the rest for evaluation.
        """
        if not 0 < n < len(self):
            raise ValueError(f"cannot split {len(self)} samples at {n}")
        train = Dataset(self.inputs[:n], self.targets[:n], TRAIN)
        test = Dataset(self.inputs[n:], self.targets[n:], TEST)
        return train, test
