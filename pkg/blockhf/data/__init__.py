"""
Datasets: MNIST from IDX files, synthetic stand-ins, preprocessing and batching.
"""

from .batches import BatchPair, sample_batches
from .dataset import TEST, TRAIN, Dataset
from .idx import load_idx, parse_idx, write_idx
from .mnist import load_mnist, prepare_autoencoder, prepare_sequential
from .preprocess import PIXELS, ROWS, avg_pool, desequentialize, sequentialize
from .synthetic import synth_autoencoder_data, synth_sequence_data

__all__ = [
    "BatchPair",
    "Dataset",
    "PIXELS",
    "ROWS",
    "TEST",
    "TRAIN",
    "avg_pool",
    "desequentialize",
    "load_idx",
    "load_mnist",
    "parse_idx",
    "prepare_autoencoder",
    "prepare_sequential",
    "sample_batches",
    "sequentialize",
    "synth_autoencoder_data",
    "synth_sequence_data",
    "write_idx",
]
