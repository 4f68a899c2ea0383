#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
MNIST from the standard IDX files, and the two ways the benchmarks look at it.

The files are not downloaded. Put these in BLOCKHF_DATA_DIR (or the directory a
config names):

    train-images-idx3-ubyte   train-labels-idx1-ubyte
    t10k-images-idx3-ubyte    t10k-labels-idx1-ubyte
"""

import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .. import settings
from ..errors import DataMissingError, ShapeMismatchError
from .dataset import SPLITS, TEST, TRAIN, Dataset
from .idx import load_idx
from .preprocess import PIXELS, avg_pool, sequentialize

logger = logging.getLogger(__name__)

FILENAMES = {
    TRAIN: ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    TEST: ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}


def load_mnist(
    directory: Union[None, str, Path] = None,
    split: str = TRAIN,
    limit: Optional[int] = None,
) -> Dataset:
    """
    Images (n × 28 × 28, scaled to [0, 1]) with their labels.
    """
    if split not in SPLITS:
        raise ValueError(f"split must be one of {SPLITS}, got {split!r}")
    directory = Path(directory) if directory is not None else settings.DATA_DIR

    paths = [directory / name for name in FILENAMES[split]]
    missing = [path.name for path in paths if not path.exists()]
    if missing:
        logger.warning("MNIST files missing from %s: %s", directory, ", ".join(missing))
        raise DataMissingError(
            f"Cannot find {', '.join(missing)} in {directory}. "
            "Download the MNIST IDX files, decompress them, and put them there "
            "(or set BLOCKHF_DATA_DIR)."
        )

    images, labels = (load_idx(path) for path in paths)
    if images.ndim != 3 or labels.ndim != 1:
        raise ShapeMismatchError("MNIST", images.shape, labels.shape)
    if limit is not None:
        images, labels = images[:limit], labels[:limit]
    logger.info("Loaded %d MNIST %s samples from %s", len(images), split, directory)
    return Dataset(images, labels, split)


def prepare_autoencoder(dataset: Dataset) -> Dataset:
    """
    Flattened images as both inputs and targets.
    """
    flat = dataset.inputs.reshape(len(dataset), -1)
    return Dataset(flat, flat, dataset.split)


def prepare_sequential(dataset: Dataset, mode: str = PIXELS, pool: int = 4) -> Dataset:
    """
    Average-pools the images by `pool` (28 × 28 becomes 7 × 7) and scans them
    into sequences. Labels are kept.
    """
    images = avg_pool(dataset.inputs, pool) if pool > 1 else dataset.inputs
    sequences = sequentialize(images, mode)
    return Dataset(np.ascontiguousarray(sequences), dataset.targets, dataset.split)
