#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
Block operators and block-diagonal HF steps.
"""

import attr
import numpy as np
import pytest

from blockhf.autodiff.evaluate import ggn_vp, grad, hvp
from blockhf.autodiff.graph import GraphBuilder, Uniform
from blockhf.bench.verify import (
    block_diagonal,
    dense_ggn,
    least_squares,
    random_batch,
    relative_error,
    tanh_mlp,
)
from blockhf.cg import CGConfig, LinearOperator, RelativeResidual, assemble_dense, cg_solve, damp
from blockhf.errors import GraphError, NumericalError, ShapeMismatchError
from blockhf.linalg import Rng
from blockhf.models.params import initial_parameters
from blockhf.optim.hessian_free import HESSIAN, HFConfig, block_hf_step, make_block_operator
from blockhf.optim.partition import Block, BlockPartition, layerwise, single
from blockhf.optim.state import TrainerState


FULL_BATCH = HFConfig(gradient_batch=8, curvature_batch=8)


def exact_cg(dim: int, damping: float = 0.0) -> CGConfig:
    return CGConfig(
        max_iters=4 * dim, stop_criterion=RelativeResidual(tol=1e-12), damping=damping
    )


@pytest.fixture
def mlp(rng):
    graph = tanh_mlp((4, 5, 3))
    batch = random_batch(8, 4, 3, rng)
    params = initial_parameters(graph, rng)
    return graph, batch, params


def test_block_operators_of_a_linear_model(two_leaf_linear):
    graph, batch = two_leaf_linear
    partition = BlockPartition([Block("w1", ["w1"]), Block("w2", ["w2"])], graph.layout)
    w = np.array([0.3, 0.7])
    first = make_block_operator(graph, partition, 0, batch, w)
    second = make_block_operator(graph, partition, 1, batch, w)
    assert np.allclose(assemble_dense(first), [[10.0]])
    assert np.allclose(assemble_dense(second), [[20.0]])


def test_single_block_operator_is_the_ggn(mlp, rng):
    graph, batch, params = mlp
    op = make_block_operator(graph, single(graph.layout), 0, batch, params.values)
    v = rng.uniform((graph.size,), -1, 1)
    assert np.array_equal(op.apply(v), ggn_vp(graph, batch, params.values, v))


def test_block_operators_are_diagonal_blocks_of_the_ggn(mlp):
    graph, batch, params = mlp
    partition = layerwise(graph.layout)
    G = dense_ggn(graph, batch, params.values)
    for b in range(len(partition)):
        op = make_block_operator(graph, partition, b, batch, params.values)
        block = G[np.ix_(partition.indices(b), partition.indices(b))]
        assert relative_error(assemble_dense(op), block) <= 1e-12


def test_hessian_block_operator(mlp, rng):
    graph, batch, params = mlp
    op = make_block_operator(
        graph, single(graph.layout), 0, batch, params.values, curvature=HESSIAN
    )
    v = rng.uniform((graph.size,), -1, 1)
    assert np.allclose(op.apply(v), hvp(graph, batch, params.values, v))


def test_block_operator_preconditions(mlp):
    graph, batch, params = mlp
    partition = single(graph.layout)
    with pytest.raises(IndexError):
        make_block_operator(graph, partition, 1, batch, params.values)
    empty = {"x": np.zeros((0, 4)), "y": np.zeros((0, 3))}
    with pytest.raises(GraphError):
        make_block_operator(graph, partition, 0, empty, params.values)


def test_step_equals_dense_block_diagonal_newton_step(mlp):
    graph, batch, params = mlp
    partition = layerwise(graph.layout)
    damping = 0.1
    cfg = HFConfig(
        learning_rate=1.0,
        gradient_batch=8,
        curvature_batch=8,
        cg=exact_cg(graph.size, damping),
    )
    state = TrainerState.initial(params, Rng(0), partition)
    stepped, report = block_hf_step(state, graph, partition, batch, batch, cfg)

    G = block_diagonal(dense_ggn(graph, batch, params.values), partition)
    expected = -np.linalg.solve(G + damping * np.eye(graph.size), grad(graph, batch, params.values))
    assert relative_error(stepped.w.values - params.values, expected) <= 1e-8

    assert stepped.k == 1
    assert len(report.cg_iterations) == len(report.q) == len(partition)
    assert all(q <= 0.0 for q in report.q)
    assert report.grad_norm == pytest.approx(np.linalg.norm(grad(graph, batch, params.values)))


def test_step_leaves_the_old_state_alone(mlp):
    graph, batch, params = mlp
    partition = layerwise(graph.layout)
    state = TrainerState.initial(params, Rng(0), partition)
    before = params.values.copy()
    block_hf_step(state, graph, partition, batch, batch, FULL_BATCH)
    assert np.array_equal(state.w.values, before)
    assert state.k == 0


def test_one_step_minimizes_a_quadratic(rng):
    dim = 20
    graph, batch, w_star = least_squares(dim, rng)
    rows = len(batch["x"])
    partition = single(graph.layout)
    cfg = HFConfig(
        learning_rate=1.0,
        gradient_batch=rows,
        curvature_batch=rows,
        cg=CGConfig(max_iters=dim, stop_criterion=RelativeResidual(tol=1e-12)),
    )
    state = TrainerState.initial(initial_parameters(graph, rng), Rng(0), partition)
    landed, _ = block_hf_step(state, graph, partition, batch, batch, cfg)
    assert np.allclose(landed.w.values, w_star, atol=1e-6)


def test_block_and_full_steps_agree_when_the_curvature_is_block_diagonal(rng):
    # Two groups of features that never appear in the same row: XᵀX is block diagonal.
    builder = GraphBuilder()
    x = builder.input("x")
    u = builder.parameter("u", (2, 1), Uniform(1.0))
    v = builder.parameter("v", (3, 1), Uniform(1.0))
    z = builder.add(
        builder.matmul(builder.slice(x, 0, 2), u), builder.matmul(builder.slice(x, 2, 5), v)
    )
    graph = builder.build(output=z, loss=builder.mse_loss(z, builder.input("y")))

    X = np.zeros((12, 5))
    X[:6, :2] = rng.uniform((6, 2), -1, 1)
    X[6:, 2:] = rng.uniform((6, 3), -1, 1)
    batch = {"x": X, "y": rng.uniform((12, 1), -1, 1)}
    params = initial_parameters(graph, rng)

    cfg = HFConfig(learning_rate=1.0, gradient_batch=12, curvature_batch=12, cg=exact_cg(5))
    blocks = layerwise(graph.layout)
    assert blocks.names == ["u", "v"]
    whole = single(graph.layout)
    by_block, _ = block_hf_step(
        TrainerState.initial(params, Rng(0), blocks), graph, blocks, batch, batch, cfg
    )
    full, _ = block_hf_step(
        TrainerState.initial(params, Rng(0), whole), graph, whole, batch, batch, cfg
    )
    assert np.allclose(by_block.w.values, full.w.values, rtol=0, atol=1e-9)


def test_single_block_is_plain_hf(mlp):
    graph, batch, params = mlp
    partition = single(graph.layout)
    cfg = HFConfig(
        learning_rate=0.5,
        gradient_batch=8,
        curvature_batch=4,
        cg=CGConfig(max_iters=5, damping=0.01),
    )
    curvature_batch = {key: value[:4] for key, value in batch.items()}
    state = TrainerState.initial(params, Rng(0), partition)
    stepped, _ = block_hf_step(state, graph, partition, batch, curvature_batch, cfg)

    w = params.values
    op = LinearOperator(graph.size, lambda v: ggn_vp(graph, curvature_batch, w, v))
    result = cg_solve(damp(op, 0.01), grad(graph, batch, w), np.zeros(graph.size), cfg.cg)
    assert np.array_equal(stepped.w.values, w + 0.5 * result.x)


def test_warm_start_scales_the_previous_solution(mlp, rng):
    graph, batch, params = mlp
    partition = layerwise(graph.layout)
    previous = tuple(rng.uniform((partition.size(b),), -1, 1) for b in range(len(partition)))
    state = attr.evolve(TrainerState.initial(params, Rng(0), partition), block_solutions=previous)
    cfg = HFConfig(learning_rate=0.1, gradient_batch=8, curvature_batch=8, cg=CGConfig(max_iters=0))

    stepped, report = block_hf_step(state, graph, partition, batch, batch, cfg)
    for b, solution in enumerate(stepped.block_solutions):
        assert np.array_equal(solution, 0.95 * previous[b])
    assert report.cg_iterations == (0,) * len(partition)
    expected = params.values + 0.1 * partition.aggregate([0.95 * p for p in previous])
    assert np.array_equal(stepped.w.values, expected)


def test_solutions_are_stored_unscaled(mlp):
    graph, batch, params = mlp
    partition = layerwise(graph.layout)
    cfg = HFConfig(
        learning_rate=0.25, gradient_batch=8, curvature_batch=8, cg=CGConfig(max_iters=3)
    )
    state = TrainerState.initial(params, Rng(0), partition)
    stepped, _ = block_hf_step(state, graph, partition, batch, batch, cfg)
    delta = partition.aggregate(stepped.block_solutions)
    assert np.allclose(stepped.w.values - params.values, 0.25 * delta, rtol=0, atol=1e-15)


def test_parallel_blocks_match_serial_blocks_exactly(mlp):
    graph, batch, params = mlp
    partition = layerwise(graph.layout)
    cfg = HFConfig(gradient_batch=8, curvature_batch=4, cg=CGConfig(max_iters=10, damping=0.01))
    curvature_batch = {key: value[:4] for key, value in batch.items()}
    state = TrainerState.initial(params, Rng(0), partition)
    for _ in range(3):
        serial, serial_report = block_hf_step(state, graph, partition, batch, curvature_batch, cfg)
        parallel, parallel_report = block_hf_step(
            state, graph, partition, batch, curvature_batch, attr.evolve(cfg, parallel_blocks=True)
        )
        assert serial.w.values.tobytes() == parallel.w.values.tobytes()
        assert serial_report == parallel_report
        state = serial


def test_curvature_batch_must_come_from_the_gradient_batch(mlp, rng):
    graph, batch, params = mlp
    partition = single(graph.layout)
    state = TrainerState.initial(params, Rng(0), partition)
    stranger = random_batch(2, 4, 3, rng)
    with pytest.raises(GraphError, match="subset"):
        cfg = HFConfig(gradient_batch=8, curvature_batch=2)
        block_hf_step(state, graph, partition, batch, stranger, cfg)


def test_a_shuffled_subset_is_accepted(mlp):
    graph, batch, params = mlp
    partition = single(graph.layout)
    state = TrainerState.initial(params, Rng(0), partition)
    picked = {key: value[[5, 1, 3]] for key, value in batch.items()}
    cfg = HFConfig(gradient_batch=8, curvature_batch=3, cg=CGConfig(max_iters=2))
    stepped, _ = block_hf_step(state, graph, partition, batch, picked, cfg)
    assert stepped.k == 1


def test_state_must_match_the_partition(mlp):
    graph, batch, params = mlp
    state = TrainerState.initial(params, Rng(0), single(graph.layout))
    with pytest.raises(ShapeMismatchError):
        block_hf_step(state, graph, layerwise(graph.layout), batch, batch, FULL_BATCH)


def test_non_finite_gradient_aborts(mlp):
    graph, batch, params = mlp
    partition = single(graph.layout)
    state = TrainerState.initial(params, Rng(0), partition)
    poisoned = dict(batch, x=batch["x"].copy())
    poisoned["x"][0, 0] = np.nan
    with pytest.raises(NumericalError) as info:
        block_hf_step(state, graph, partition, poisoned, poisoned, FULL_BATCH)
    assert info.value.diagnostics["update"] == 0


@pytest.mark.parametrize(
    "kwargs",
    [
        {"learning_rate": 0.0},
        {"gradient_batch": 64, "curvature_batch": 128},
        {"momentum": 1.5},
        {"curvature": "fisher"},
        {"workers": 0},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        HFConfig(**kwargs)
