#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

from typing import Mapping, Optional

import numpy as np

from ..autodiff.evaluate import EvalContext, batch_size, forward
from ..autodiff.graph import Graph
from ..errors import GraphError


def batch_loss(
    graph: Graph, batch: Mapping[str, np.ndarray], w, ctx: Optional[EvalContext] = None
) -> float:
    """
    Mean per-sample loss over the batch.
    """
    if batch_size(batch) == 0:
        raise GraphError("batch is empty")
    return float(forward(graph, batch, w, ctx))


def batch_accuracy(
    graph: Graph, batch: Mapping[str, np.ndarray], w, ctx: Optional[EvalContext] = None
) -> float:
    """
    Fraction of samples whose largest logit is the label.
    """
    if batch_size(batch) == 0:
        raise GraphError("batch is empty")
    logits = forward(graph, batch, w, ctx, node=graph.output)
    predictions = np.argmax(np.atleast_2d(logits), axis=-1)
    labels = np.asarray(batch["y"]).astype(np.int64).ravel()
    return float(np.mean(predictions == labels))
