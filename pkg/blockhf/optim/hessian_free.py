#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
Block-diagonal Hessian-free optimization.

One loop of the method:

 1. compute the gradient g over the gradient mini-batch S_g;
 2. for every block b, minimize the block's quadratic model
        q_b(Δw_b) = Δw_bᵀ g_b + ½ Δw_bᵀ (G_b + dI) Δw_b
    with truncated CG, using the curvature mini-batch S_c ⊆ S_g and starting
    from the block's previous solution scaled by the momentum constant;
 3. aggregate Δw = [Δw_1; …; Δw_B] and set w ← w + αΔw.

G_b is the b-th diagonal block of the curvature matrix, so the off-diagonal
coupling between blocks is ignored. With a single block this is ordinary HF.
The block sub-problems are independent and may run in parallel.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Mapping, Optional, Tuple

import attr
import numpy as np
from typing_extensions import Literal

from .. import settings
from ..autodiff.evaluate import EvalContext, batch_size, ggn_vp, grad, hvp
from ..autodiff.graph import Graph
from ..cg import CGConfig, CGResult, LinearOperator, cg_solve, damp
from ..errors import GraphError
from ..linalg import ensure_finite, norm
from ..models.objective import batch_loss
from .partition import BlockPartition
from .state import TrainerState

logger = logging.getLogger(__name__)

Batch = Mapping[str, np.ndarray]

Curvature = Literal["ggn", "hessian"]

GGN: Curvature = "ggn"
HESSIAN: Curvature = "hessian"
CURVATURES = (GGN, HESSIAN)


@attr.s(auto_attribs=True, frozen=True)
class HFConfig:
    learning_rate: float = 0.1
    max_loops: int = 100
    gradient_batch: int = 512
    curvature_batch: int = 64
    cg: CGConfig = attr.ib(factory=CGConfig)
    momentum: float = 0.95
    parallel_blocks: bool = False
    curvature: Curvature = GGN
    workers: Optional[int] = None

    def __attrs_post_init__(self) -> None:
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0 < self.curvature_batch <= self.gradient_batch:
            raise ValueError(
                "need 0 < curvature_batch <= gradient_batch, got "
                f"{self.curvature_batch} and {self.gradient_batch}"
            )
        if not 0.0 <= self.momentum <= 1.0:
            raise ValueError(f"momentum must be in [0, 1], got {self.momentum}")
        if self.curvature not in CURVATURES:
            raise ValueError(f"curvature must be one of {CURVATURES}, got {self.curvature!r}")
        if self.max_loops < 0:
            raise ValueError(f"max_loops must be non-negative, got {self.max_loops}")
        if self.workers is not None and self.workers < 1:
            raise ValueError(f"workers must be at least 1, got {self.workers}")


@attr.s(auto_attribs=True, frozen=True)
class StepReport:
    """
    Diagnostics of one loop, measured before the update.
    """

    loss: float
    grad_norm: float
    cg_iterations: Tuple[int, ...]
    q: Tuple[float, ...]
    reasons: Tuple[str, ...]


def make_block_operator(
    graph: Graph,
    partition: BlockPartition,
    b: int,
    curvature_batch: Batch,
    w,
    ctx: Optional[EvalContext] = None,
    curvature: Curvature = GGN,
) -> LinearOperator:
    """
    G_b: v_b ↦ the block-b entries of G·embed(v_b).

    The operator owns an evaluation context, so the forward pass over the
    curvature batch happens once no matter how many products CG asks for. Keep
    curvature_batch and w unchanged while the operator is in use.
    """
    if not 0 <= b < len(partition):
        raise IndexError(f"block index {b} out of range for {len(partition)} blocks")
    if batch_size(curvature_batch) == 0:
        raise GraphError("curvature batch is empty")
    if curvature not in CURVATURES:
        raise ValueError(f"curvature must be one of {CURVATURES}, got {curvature!r}")

    ctx = ctx if ctx is not None else EvalContext(graph)
    product = ggn_vp if curvature == GGN else hvp
    indices = partition.indices(b)

    def matvec(v_b: np.ndarray) -> np.ndarray:
        return product(graph, curvature_batch, w, partition.embed(v_b, b), ctx)[indices]

    return LinearOperator(partition.size(b), matvec)


def _is_row_subset(small: Batch, large: Batch) -> bool:
    """
    True when every sample of `small` is also a sample of `large`. Batches drawn
    by sample_batches pass the prefix check without hashing.
    """
    if set(small) != set(large):
        return False
    n = batch_size(small)
    if n > batch_size(large):
        return False
    if all(np.array_equal(small[k], np.asarray(large[k])[:n]) for k in small):
        return True

    def rows(batch: Batch, count: int) -> List[bytes]:
        columns = [np.ascontiguousarray(np.asarray(batch[k])) for k in sorted(batch)]
        return [b"|".join(column[i].tobytes() for column in columns) for i in range(count)]

    return set(rows(small, n)) <= set(rows(large, batch_size(large)))


def block_hf_step(
    state: TrainerState,
    graph: Graph,
    partition: BlockPartition,
    gradient_batch: Batch,
    curvature_batch: Batch,
    cfg: HFConfig,
) -> Tuple[TrainerState, StepReport]:
    """
    One loop of block-diagonal HF. Returns the new state and the loop's
    diagnostics; `state` itself is left untouched.
    """
    state.check_blocks(partition)
    if not _is_row_subset(curvature_batch, gradient_batch):
        raise GraphError("curvature batch is not a subset of the gradient batch")

    w = state.w.values
    ctx = EvalContext(graph)
    loss = batch_loss(graph, gradient_batch, w, ctx)
    g = grad(graph, gradient_batch, w, ctx)
    ensure_finite("loss and gradient", np.asarray(loss), g, update=state.k, loss=loss)
    grad_norm = norm(g)

    def solve(b: int) -> CGResult:
        op = make_block_operator(
            graph, partition, b, curvature_batch, w, curvature=cfg.curvature
        )
        x0 = cfg.momentum * state.block_solutions[b]
        result = cg_solve(damp(op, cfg.cg.damping), partition.restrict(g, b), x0, cfg.cg)
        logger.debug(
            "update %d block %s: %d CG iterations (%s), q=%g",
            state.k,
            partition.blocks[b].name,
            result.iterations,
            result.reason,
            result.q,
        )
        return result

    blocks = range(len(partition))
    if cfg.parallel_blocks and len(partition) > 1:
        workers = cfg.workers or settings.WORKERS or len(partition)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(solve, blocks))
    else:
        results = [solve(b) for b in blocks]

    delta = partition.aggregate([result.x for result in results])
    w_next = w + cfg.learning_rate * delta
    ensure_finite("updated parameters", w_next, update=state.k, loss=loss)

    report = StepReport(
        loss=loss,
        grad_norm=grad_norm,
        cg_iterations=tuple(result.iterations for result in results),
        q=tuple(result.q for result in results),
        reasons=tuple(result.reason for result in results),
    )
    next_state = attr.evolve(
        state,
        w=state.w.replace(w_next),
        block_solutions=tuple(result.x for result in results),
        k=state.k + 1,
    )
    return next_state, report
