#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
Numerical self-checks, runnable from the command line.

Every check measures one quantity (an error, a residual) and compares it with a
tolerance. The dense oracles here assemble matrices explicitly, so they only
make sense on small networks.

    autodiff    gradients and Hessian-vector products against finite differences;
                GGN products against the densely assembled GGN
    cg          CG against direct solves
    optimizer   block operators and block-HF steps against dense block-diagonal
                curvature; Adam and Polyak closed forms
"""

import logging
import math
from typing import Callable, Dict, List, Mapping, Sequence, Tuple

import attr
import numpy as np

from ..autodiff.evaluate import EvalContext, forward, ggn_vp, grad, hvp, jvp
from ..autodiff.graph import Constant, Graph, GraphBuilder, LeafSlot, Uniform
from ..autodiff.losses import MSE, SOFTMAX_XENT, loss_output_hessian_apply
from ..cg import CGConfig, LinearOperator, RelativeResidual, assemble_dense, cg_solve
from ..errors import ConfigError
from ..linalg import DTYPE, Rng, glorot_bound
from ..models.params import ParamVector, initial_parameters
from ..models.presets import build_model
from ..models.spec import STACKED_LSTM, ModelSpec
from ..optim.adam import AdamConfig, adam_step
from ..optim.hessian_free import HFConfig, block_hf_step, make_block_operator
from ..optim.partition import BlockPartition, layerwise, single
from ..optim.polyak import polyak_update
from ..optim.state import TrainerState

logger = logging.getLogger(__name__)

Batch = Dict[str, np.ndarray]

FD_EPSILON = 1e-5
FD_TOLERANCE = 1e-5
GGN_TOLERANCE = 1e-8
BLOCK_TOLERANCE = 1e-12
STEP_TOLERANCE = 1e-8
CG_TOLERANCE = 1e-8
NEWTON_TOLERANCE = 1e-6


@attr.s(auto_attribs=True, frozen=True)
class Check:
    suite: str
    name: str
    measured: float
    tolerance: float
    at_least: bool = False

    @property
    def passed(self) -> bool:
        if math.isnan(self.measured):
            return False
        if self.at_least:
            return self.measured >= self.tolerance
        return self.measured <= self.tolerance

    def describe(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        relation = ">=" if self.at_least else "<="
        return (
            f"{status}  {self.suite}/{self.name}: "
            f"{self.measured:.3e} (need {relation} {self.tolerance:.0e})"
        )


############################### Small networks ###############################


def tanh_mlp(sizes: Sequence[int], loss: str = MSE) -> Graph:
    """
    Fully connected tanh layers with a linear output layer.
    """
    builder = GraphBuilder()
    h = builder.input("x")
    layers = list(zip(sizes, sizes[1:]))
    for i, (fan_in, fan_out) in enumerate(layers):
        bound = glorot_bound(fan_in, fan_out)
        W = builder.parameter(f"layer.{i}.W", (fan_in, fan_out), Uniform(bound))
        b = builder.parameter(f"layer.{i}.b", (fan_out,), Uniform(0.1))
        h = builder.add(builder.matmul(h, W), b)
        if i < len(layers) - 1:
            h = builder.tanh(h)
    target = builder.input("y")
    if loss == MSE:
        objective = builder.mse_loss(h, target)
    else:
        objective = builder.softmax_xent(h, target)
    return builder.build(output=h, loss=objective)


def linear_model(n_in: int, n_out: int) -> Graph:
    """
    z = x W + b with mean squared error: the GGN is the exact Hessian.
    """
    builder = GraphBuilder()
    x = builder.input("x")
    W = builder.parameter("linear.W", (n_in, n_out), Uniform(0.5))
    b = builder.parameter("linear.b", (n_out,), Constant(0.0))
    z = builder.add(builder.matmul(x, W), b)
    return builder.build(output=z, loss=builder.mse_loss(z, builder.input("y")))


def random_batch(n: int, n_in: int, n_out: int, rng: Rng, labels: bool = False) -> Batch:
    x = rng.uniform((n, n_in), -1.0, 1.0)
    if labels:
        return {"x": x, "y": rng.integers(n_out, size=n).astype(np.int64)}
    return {"x": x, "y": rng.uniform((n, n_out), -1.0, 1.0)}


def small_lstm(steps: int = 3) -> Tuple[Graph, ModelSpec]:
    spec = ModelSpec(
        kind=STACKED_LSTM, layers=2, hidden=3, input_size=2, classes=3, steps=steps
    )
    return build_model(spec), spec


def least_squares(dim: int, rng: Rng, rows: int = 0) -> Tuple[Graph, Batch, np.ndarray]:
    """
    A quadratic loss ½(w − w*)ᵀA(w − w*) + const in disguise: linear regression
    on data generated exactly by w*. Its minimizer is w*.
    """
    rows = rows or 4 * dim
    builder = GraphBuilder()
    x = builder.input("x")
    W = builder.parameter("linear.W", (dim, 1), Uniform(1.0))
    z = builder.matmul(x, W)
    graph = builder.build(output=z, loss=builder.mse_loss(z, builder.input("y")))
    w_star = rng.uniform((dim,), -1.0, 1.0)
    X = rng.uniform((rows, dim), -1.0, 1.0)
    return graph, {"x": X, "y": (X @ w_star)[:, None]}, w_star


################################## Oracles ###################################


def relative_error(actual: np.ndarray, expected: np.ndarray) -> float:
    """
    ‖actual − expected‖∞ relative to the larger of the two norms.

    >>> relative_error(np.array([1.0, 2.0]), np.array([1.0, 2.0]))
    0.0
    >>> relative_error(np.array([1.0, 2.0]), np.array([1.0, 1.0]))
    0.5
    """
    scale = max(np.max(np.abs(actual), initial=0.0), np.max(np.abs(expected), initial=0.0))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(actual - expected)) / scale)


def central_differences(
    f: Callable[[np.ndarray], float], w: np.ndarray, eps: float = FD_EPSILON
) -> np.ndarray:
    """
    Entry i is (f(w + εeᵢ) − f(w − εeᵢ)) / 2ε.
    """
    result = np.empty(w.size, dtype=DTYPE)
    for i in range(w.size):
        step = np.zeros_like(w)
        step[i] = eps
        result[i] = (f(w + step) - f(w - step)) / (2 * eps)
    return result


def directional_difference(
    f: Callable[[np.ndarray], np.ndarray],
    w: np.ndarray,
    v: np.ndarray,
    eps: float = FD_EPSILON,
) -> np.ndarray:
    return (f(w + eps * v) - f(w - eps * v)) / (2 * eps)


def dense_jacobian(graph: Graph, batch: Mapping[str, np.ndarray], w: np.ndarray) -> np.ndarray:
    """
    J[n, o, i] = ∂z[n, o] / ∂w[i], one forward-mode pass per parameter.
    """
    ctx = EvalContext(graph)
    basis = np.zeros(graph.size, dtype=DTYPE)
    columns = []
    for i in range(graph.size):
        basis[i] = 1.0
        columns.append(np.array(jvp(graph, batch, w, basis, ctx)))
        basis[i] = 0.0
    return np.stack(columns, axis=-1)


def dense_ggn(graph: Graph, batch: Mapping[str, np.ndarray], w: np.ndarray) -> np.ndarray:
    """
    (1/N) Σₙ Jₙᵀ H_ℓ Jₙ, assembled explicitly.
    """
    J = dense_jacobian(graph, batch, w)
    ctx = EvalContext(graph)
    forward(graph, batch, w, ctx)
    z, y = ctx.values[graph.output], ctx.values[graph.target]
    HJ = np.stack(
        [
            loss_output_hessian_apply(graph.loss_kind, z, y, J[:, :, i])
            for i in range(graph.size)
        ],
        axis=-1,
    )
    return np.einsum("noi,noj->ij", J, HJ) / z.shape[0]


def block_diagonal(dense: np.ndarray, partition: BlockPartition) -> np.ndarray:
    """
    The dense matrix with every entry coupling two different blocks set to zero.
    """
    result = np.zeros_like(dense)
    for b in range(len(partition)):
        idx = np.ix_(partition.indices(b), partition.indices(b))
        result[idx] = dense[idx]
    return result


def spd_matrix(n: int, condition: float, rng: Rng) -> np.ndarray:
    """
    A random symmetric positive definite matrix with the given condition number.
    """
    q, _ = np.linalg.qr(rng.uniform((n, n), -1.0, 1.0))
    eigenvalues = np.logspace(0.0, math.log10(condition), n)
    return (q * eigenvalues) @ q.T


################################### Suites ###################################


def check_autodiff(seed: int = 0, pairs: int = 20) -> List[Check]:
    rng = Rng(seed)
    checks = []

    graph = tanh_mlp((5, 8, 6, 4))
    batch = random_batch(10, 5, 4, rng)
    grad_error = hvp_error = 0.0
    for _ in range(pairs):
        w = initial_parameters(graph, rng).values
        v = rng.uniform((graph.size,), -1.0, 1.0)
        fd_grad = central_differences(lambda u: forward(graph, batch, u), w)
        grad_error = max(grad_error, relative_error(grad(graph, batch, w), fd_grad))
        fd_hvp = directional_difference(lambda u: grad(graph, batch, u), w, v)
        hvp_error = max(hvp_error, relative_error(hvp(graph, batch, w, v), fd_hvp))
    checks += [
        Check("autodiff", "grad vs central differences", grad_error, FD_TOLERANCE),
        Check("autodiff", "hvp vs differences of gradients", hvp_error, FD_TOLERANCE),
    ]

    lstm, spec = small_lstm()
    sequences = random_batch(6, spec.feature_size, spec.classes, rng, labels=True)
    w = initial_parameters(lstm, rng).values
    v = rng.uniform((lstm.size,), -1.0, 1.0)
    fd_hvp = directional_difference(lambda u: grad(lstm, sequences, u), w, v)
    error = relative_error(hvp(lstm, sequences, w, v), fd_hvp)
    checks.append(Check("autodiff", "LSTM hvp vs differences of gradients", error, FD_TOLERANCE))

    for loss in (MSE, SOFTMAX_XENT):
        net = tanh_mlp((4, 6, 3), loss)
        data = random_batch(7, 4, 3, rng, labels=loss == SOFTMAX_XENT)
        w = initial_parameters(net, rng).values
        G = dense_ggn(net, data, w)
        ctx = EvalContext(net)
        error, smallest = 0.0, float("inf")
        for _ in range(100):
            v = rng.uniform((net.size,), -1.0, 1.0)
            Gv = ggn_vp(net, data, w, v, ctx)
            error = max(error, relative_error(Gv, G @ v))
            smallest = min(smallest, float(v @ Gv))
        checks += [
            Check("autodiff", f"ggn_vp vs dense GGN ({loss})", error, GGN_TOLERANCE),
            Check("autodiff", f"vᵀGv non-negative ({loss})", smallest, -1e-10, at_least=True),
        ]

    linear = linear_model(4, 3)
    data = random_batch(9, 4, 3, rng)
    w = initial_parameters(linear, rng).values
    v = rng.uniform((linear.size,), -1.0, 1.0)
    error = relative_error(ggn_vp(linear, data, w, v), hvp(linear, data, w, v))
    checks.append(Check("autodiff", "ggn_vp equals hvp on a linear model", error, GGN_TOLERANCE))
    return checks


def check_cg(seed: int = 0) -> List[Check]:
    rng = Rng(seed)
    checks = []

    A = np.array([[4.0, 1.0], [1.0, 3.0]])
    g = np.array([-1.0, -2.0])
    exact = CGConfig(max_iters=2, stop_criterion=RelativeResidual(tol=1e-12))
    result = cg_solve(LinearOperator(2, lambda v: A @ v), g, np.zeros(2), exact)
    residual = float(np.linalg.norm(A @ result.x + g))
    checks.append(Check("cg", "2×2 system residual", residual, CG_TOLERANCE))

    solution_error = 0.0
    increase = 0.0
    for n, condition in ((5, 10.0), (12, 100.0), (20, 100.0), (8, 1000.0)):
        A = spd_matrix(n, condition, rng)
        g = rng.uniform((n,), -1.0, 1.0)
        cfg = CGConfig(max_iters=n, stop_criterion=RelativeResidual(tol=1e-12))
        op = LinearOperator(n, lambda v, A=A: A @ v)
        result = cg_solve(op, g, np.zeros(n), cfg)
        solution_error = max(solution_error, relative_error(result.x, np.linalg.solve(A, -g)))
        increase = max(increase, float(np.max(np.diff(result.q_history), initial=0.0)))
    checks += [
        Check("cg", "SPD solutions vs direct solve", solution_error, CG_TOLERANCE),
        Check("cg", "quadratic model never increases", increase, 1e-12),
    ]
    return checks


def check_optimizer(seed: int = 0) -> List[Check]:
    rng = Rng(seed)
    checks = []

    net = tanh_mlp((4, 5, 3))
    data = random_batch(8, 4, 3, rng)
    params = initial_parameters(net, rng)
    partition = layerwise(net.layout)
    G = dense_ggn(net, data, params.values)

    error = 0.0
    for b in range(len(partition)):
        op = make_block_operator(net, partition, b, data, params.values)
        idx = np.ix_(partition.indices(b), partition.indices(b))
        error = max(error, relative_error(assemble_dense(op), G[idx]))
    checks.append(
        Check("optimizer", "block operators vs dense GGN blocks", error, BLOCK_TOLERANCE)
    )

    damping = 0.1
    cfg = HFConfig(
        learning_rate=1.0,
        gradient_batch=8,
        curvature_batch=8,
        cg=CGConfig(
            max_iters=4 * net.size,
            stop_criterion=RelativeResidual(tol=1e-12),
            damping=damping,
        ),
    )
    state = TrainerState.initial(params, Rng(seed), partition)
    stepped, _ = block_hf_step(state, net, partition, data, data, cfg)
    curvature = block_diagonal(G, partition) + damping * np.eye(net.size)
    expected = -np.linalg.solve(curvature, grad(net, data, params.values))
    error = relative_error(stepped.w.values - params.values, expected)
    checks.append(
        Check("optimizer", "block-HF step vs dense block-diagonal step", error, STEP_TOLERANCE)
    )

    in_parallel = attr.evolve(cfg, parallel_blocks=True)
    parallel, _ = block_hf_step(state, net, partition, data, data, in_parallel)
    difference = float(np.max(np.abs(parallel.w.values - stepped.w.values)))
    checks.append(Check("optimizer", "parallel blocks equal serial blocks", difference, 0.0))

    dim = 50
    quadratic, batch, w_star = least_squares(dim, rng)
    rows = len(batch["x"])
    newton = HFConfig(
        learning_rate=1.0,
        gradient_batch=rows,
        curvature_batch=rows,
        cg=CGConfig(max_iters=dim, stop_criterion=RelativeResidual(tol=1e-12)),
    )
    whole = single(quadratic.layout)
    start = TrainerState.initial(initial_parameters(quadratic, rng), Rng(seed), whole)
    landed, _ = block_hf_step(start, quadratic, whole, batch, batch, newton)
    distance = float(np.max(np.abs(landed.w.values - w_star)))
    checks.append(
        Check("optimizer", "one HF step minimizes a quadratic", distance, NEWTON_TOLERANCE)
    )

    adam = AdamConfig()
    signs = np.where(rng.uniform((10,), -1.0, 1.0) > 0, 1.0, -1.0)
    g = rng.uniform((10,), 1.0, 5.0) * signs
    w0 = ParamVector(np.zeros(10), (LeafSlot("w", 0, (10,)),))
    moved = adam_step(TrainerState.initial(w0, Rng(seed)), g, adam).w.values
    error = float(np.max(np.abs(moved + adam.learning_rate * signs)))
    checks.append(
        Check("optimizer", "first Adam step is −α·sign(g)", error, adam.learning_rate * 1e-6)
    )

    avg = np.zeros(3)
    worst = 0.0
    for t in range(1, 101):
        avg = polyak_update(avg, np.ones(3), 0.99)
        if t in (1, 10, 100):
            worst = max(worst, float(np.max(np.abs(avg - (1.0 - 0.99 ** t)))))
    checks.append(Check("optimizer", "Polyak average closed form", worst, 1e-12))
    return checks


SUITES: Dict[str, Callable[[int], List[Check]]] = {
    "autodiff": check_autodiff,
    "cg": check_cg,
    "optimizer": check_optimizer,
}
ALL = "all"


def run_suite(name: str, seed: int = 0) -> List[Check]:
    if name == ALL:
        return [check for suite in SUITES for check in run_suite(suite, seed)]
    if name not in SUITES:
        choices = ", ".join([*SUITES, ALL])
        raise ConfigError(f"unknown suite {name!r}; choose from {choices}")
    logger.info("Running the %s checks", name)
    return SUITES[name](seed)


def format_report(checks: Sequence[Check]) -> str:
    failures = sum(not check.passed for check in checks)
    lines = [check.describe() for check in checks]
    lines.append(f"{len(checks) - failures} passed, {failures} failed")
    return "\n".join(lines)
