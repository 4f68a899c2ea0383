#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
Fixtures shared by the test modules.
"""

from pathlib import Path

import attr
import numpy as np
import pytest

from blockhf.autodiff.graph import Constant, GraphBuilder
from blockhf.autodiff.primitives import PRIMITIVES, Tanh
from blockhf.bench.config import load_config
from blockhf.linalg import Rng


@pytest.fixture
def rng():
    return Rng(0)


@pytest.fixture
def two_leaf_linear():
    """
    f(w) = X w for X = [[1, 2], [3, 4]] as a single sample, with w₁ and w₂ in
    separate parameter leaves. Returns the graph and its batch.
    """
    X = np.array([[1.0, 2.0], [3.0, 4.0]])
    builder = GraphBuilder()
    w1 = builder.parameter("w1", (1, 1), Constant(0.0))
    w2 = builder.parameter("w2", (1, 1), Constant(0.0))
    # (1 × 2)·Xᵀ is the row (X w)ᵀ
    z = builder.matmul(builder.concat(w1, w2), builder.input("x"))
    graph = builder.build(output=z, loss=builder.mse_loss(z, builder.input("y")))
    return graph, {"x": X.T.copy(), "y": np.zeros((1, 2))}


@pytest.fixture
def experiment(shared_datadir, tmp_path):
    """
    Loads one of the configs in tests/data, with its output pointed into tmp_path.
    """

    def load(name: str, **run_overrides):
        config = load_config(shared_datadir / name)
        run = attr.evolve(config.run, output=Path(tmp_path / f"{Path(name).stem}.csv"))
        if run_overrides:
            run = attr.evolve(run, **run_overrides)
        return attr.evolve(config, run=run)

    return load


class BrokenTanh(Tanh):
    """
    tanh with a tangent that is off by a factor of two.
    """

    def tangent(self, node, xs, dxs, out):
        return 2.0 * super().tangent(node, xs, dxs, out)

    def tangent_vjp(self, node, xs, dxs, out, dout, tangent_cot, needs):
        cotangents = super().tangent_vjp(node, xs, dxs, out, dout, tangent_cot, needs)
        return [None if c is None else 2.0 * c for c in cotangents]


@pytest.fixture
def broken_tangent(monkeypatch):
    """
    Swaps in a tanh primitive whose forward-mode rule is wrong.
    """
    monkeypatch.setitem(PRIMITIVES, "tanh", BrokenTanh())
