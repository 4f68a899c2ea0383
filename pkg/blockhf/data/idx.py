#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
Reads and writes the IDX files MNIST is distributed as.

-----------------
The IDX file format
-----------------

All integers are big-endian:

 * magic number: two zero bytes, a type byte (0x08 = unsigned byte) and the
   number of dimensions; 0x00000803 for an image file (n × rows × columns),
   0x00000801 for a label file (n);
 * one unsigned 32-bit size per dimension;
 * the payload, one byte per element, row-major.

Images are returned as float64 scaled to [0, 1]; labels as int64.
"""

import logging
import math
import os
from pathlib import Path
from typing import Union

import numpy as np

from ..errors import DataMissingError, IDXFormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, "os.PathLike[str]"]

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801
MAGIC_NUMBERS = {IMAGES_MAGIC: 3, LABELS_MAGIC: 1}

# Element counts past this are certainly a corrupt header.
MAX_ELEMENTS = 2 ** 31 - 1

_HEADER = np.dtype(">u4")


def parse_idx(raw: bytes, source: str = "<bytes>") -> np.ndarray:
    """
    Parses the contents of an IDX file.

    >>> parse_idx(bytes([0, 0, 8, 1, 0, 0, 0, 2, 7, 2]))
    array([7, 2])
    """
    if len(raw) < 4:
        raise IDXFormatError(f"{source}: too short for an IDX header ({len(raw)} bytes)")
    magic = int(np.frombuffer(raw, dtype=_HEADER, count=1)[0])
    if magic not in MAGIC_NUMBERS:
        raise IDXFormatError(
            f"{source}: bad magic number 0x{magic:08X}; "
            f"expected 0x{IMAGES_MAGIC:08X} or 0x{LABELS_MAGIC:08X}"
        )

    rank = MAGIC_NUMBERS[magic]
    header_size = 4 * (1 + rank)
    if len(raw) < header_size:
        raise IDXFormatError(f"{source}: truncated header")
    shape = tuple(int(d) for d in np.frombuffer(raw, dtype=_HEADER, count=rank, offset=4))

    count = math.prod(shape)
    if count > MAX_ELEMENTS:
        raise IDXFormatError(f"{source}: dimensions {shape} overflow ({count} elements)")
    payload = len(raw) - header_size
    if payload < count:
        raise IDXFormatError(
            f"{source}: truncated payload: expected {count} bytes, found {payload}"
        )
    if payload > count:
        raise IDXFormatError(f"{source}: {payload - count} unexpected trailing bytes")

    data = np.frombuffer(raw, dtype=np.uint8, count=count, offset=header_size).reshape(shape)
    if magic == LABELS_MAGIC:
        return data.astype(np.int64)
    return data.astype(np.float64) / 255.0


def load_idx(path: PathLike) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise DataMissingError(f"Cannot find IDX file: {path}")
    logger.info("Loading %s", path)
    return parse_idx(path.read_bytes(), source=os.fspath(path))


def encode_idx(data: np.ndarray) -> bytes:
    """
    Encodes unsigned bytes (rank 1 or 3) as an IDX file. Float arrays in [0, 1]
    are scaled by 255 and rounded first.
    """
    data = np.asarray(data)
    if data.ndim not in (1, 3):
        raise IDXFormatError(f"can only write rank 1 or rank 3 arrays, not rank {data.ndim}")
    if data.dtype.kind == "f":
        data = np.rint(data * 255.0)
    if data.size and (data.min() < 0 or data.max() > 255):
        raise IDXFormatError("values do not fit in unsigned bytes")

    magic = LABELS_MAGIC if data.ndim == 1 else IMAGES_MAGIC
    header = np.array((magic,) + data.shape, dtype=_HEADER)
    return header.tobytes() + data.astype(np.uint8).tobytes()


def write_idx(path: PathLike, data: np.ndarray) -> None:
    Path(path).write_bytes(encode_idx(data))
