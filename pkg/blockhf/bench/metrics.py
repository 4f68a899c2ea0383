#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
Training curves as CSV.

Column order is fixed: update, epoch, wall_clock, train_loss, eval_loss,
eval_accuracy (classifiers only), grad_norm, then cg_iters_<block> and
q_<block> for every block of a Hessian-free run. Floats are written with repr,
so identical runs give identical bytes (wall_clock aside).
"""

import csv
from pathlib import Path
from types import TracebackType
from typing import IO, List, Optional, Sequence, Tuple, Type

import attr

from ..linalg import ensure_finite


@attr.s(auto_attribs=True, frozen=True)
class MetricsRow:
    update: int
    epoch: int
    wall_clock: float
    train_loss: float
    eval_loss: float
    grad_norm: float
    eval_accuracy: Optional[float] = None
    cg_iterations: Tuple[int, ...] = attr.ib(default=(), converter=tuple)
    q: Tuple[float, ...] = attr.ib(default=(), converter=tuple)


def header(blocks: Sequence[str], classifier: bool) -> List[str]:
    """
    >>> header(["encoder", "decoder"], classifier=False)  # doctest: +NORMALIZE_WHITESPACE
    ['update', 'epoch', 'wall_clock', 'train_loss', 'eval_loss', 'grad_norm',
     'cg_iters_encoder', 'cg_iters_decoder', 'q_encoder', 'q_decoder']
    """
    columns = ["update", "epoch", "wall_clock", "train_loss", "eval_loss"]
    if classifier:
        columns.append("eval_accuracy")
    columns.append("grad_norm")
    columns.extend(f"cg_iters_{name}" for name in blocks)
    columns.extend(f"q_{name}" for name in blocks)
    return columns


class MetricsWriter:
    """
    Writes the header on open and flushes after every row, so an aborted run
    leaves every row written so far on disk.
    """

    def __init__(self, path: Path, blocks: Sequence[str], classifier: bool) -> None:
        self.path = Path(path)
        self.blocks = list(blocks)
        self.classifier = classifier
        self.rows_written = 0
        self._last_update: Optional[int] = None
        self._file: Optional[IO[str]] = None

    def __enter__(self) -> "MetricsWriter":
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._file = self.path.open("w", encoding="UTF-8", newline="")
        self._writer = csv.writer(self._file, lineterminator="\n")
        self._writer.writerow(header(self.blocks, self.classifier))
        self._file.flush()
        return self

    def __exit__(
        self,
        exc_type: Optional[Type[BaseException]],
        exc: Optional[BaseException],
        traceback: Optional[TracebackType],
    ) -> None:
        if self._file is not None:
            self._file.close()
            self._file = None

    def write(self, row: MetricsRow) -> None:
        if self._file is None:
            raise RuntimeError("metrics writer is not open")
        if self._last_update is not None and row.update <= self._last_update:
            raise ValueError(f"update {row.update} does not follow {self._last_update}")
        if len(row.cg_iterations) != len(self.blocks) or len(row.q) != len(self.blocks):
            raise ValueError(f"expected per-block values for {len(self.blocks)} blocks")
        ensure_finite("metrics", row.train_loss, row.eval_loss, update=row.update)

        values: List[object] = [
            row.update,
            row.epoch,
            repr(float(row.wall_clock)),
            repr(float(row.train_loss)),
            repr(float(row.eval_loss)),
        ]
        if self.classifier:
            values.append(repr(float(row.eval_accuracy or 0.0)))
        values.append(repr(float(row.grad_norm)))
        values.extend(row.cg_iterations)
        values.extend(repr(float(q)) for q in row.q)

        self._writer.writerow(values)
        self._file.flush()
        self._last_update = row.update
        self.rows_written += 1


def read_metrics(path: Path) -> List[dict]:
    """
    The rows of a metrics file, values as strings.
    """
    with Path(path).open(encoding="UTF-8", newline="") as f:
        return list(csv.DictReader(f))
