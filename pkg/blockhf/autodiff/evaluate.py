#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
Evaluating graphs: values, gradients, and curvature-vector products.

    forward   values of every node
    grad      ∇ℓ, one reverse (L-operator) pass
    jvp       J·v at the output, one forward-mode (R-operator) pass
    hvp       H·v = L{R_v{ℓ}}: the reverse pass run over the tangent computation
    ggn_vp    G·v = Jᵀ H_ℓ J v averaged over the batch

A Graph is immutable and can be shared between threads. An EvalContext holds all
mutable state of one evaluation and has exactly one owner at a time.
"""

import logging
from typing import List, Mapping, Optional, Tuple, Union

import numpy as np

from ..errors import GraphError, ShapeMismatchError
from ..linalg import DTYPE
from .graph import INPUT, PARAMETER, Graph
from .losses import loss_output_hessian_apply
from .primitives import PRIMITIVES

logger = logging.getLogger(__name__)

Inputs = Mapping[str, np.ndarray]
Array = np.ndarray


class EvalContext:
    """
    Per-node value, tangent and adjoint buffers for one graph.

    The context remembers which inputs and which w its values were computed for;
    asking again for the very same objects reuses the forward pass. That is what
    lets a CG solve run many curvature-vector products against one primal pass.
    Parameter vectors must therefore never be mutated in place.
    """

    def __init__(self, graph: Graph) -> None:
        self.graph = graph
        size = len(graph.nodes)
        self.values: List[Optional[Array]] = [None] * size
        self.tangents: List[Optional[Array]] = [None] * size
        self.adjoints: List[Optional[Array]] = [None] * size
        self.tangent_adjoints: List[Optional[Array]] = [None] * size
        self._bound: Optional[Tuple[Inputs, Array]] = None
        self._needs_adjoint = graph.depends_on_parameters()

    def is_bound_to(self, inputs: Inputs, w: Array) -> bool:
        return (
            self._bound is not None
            and self._bound[0] is inputs
            and self._bound[1] is w
        )

    def reset(self) -> None:
        self._bound = None


def parameter_values(w) -> Array:
    """
    Accepts a ParamVector or a bare flat array.
    """
    return getattr(w, "values", w)


def _context_for(graph: Graph, ctx: Optional[EvalContext]) -> EvalContext:
    if ctx is None:
        return EvalContext(graph)
    if ctx.graph is not graph:
        raise GraphError("evaluation context belongs to a different graph")
    return ctx


def _run_forward(graph: Graph, inputs: Inputs, w: Array, ctx: EvalContext) -> None:
    if ctx.is_bound_to(inputs, w):
        return
    if w.ndim != 1 or w.size != graph.size:
        raise ShapeMismatchError("parameter vector", w.shape, (graph.size,))

    slots = dict(zip(graph.parameters, graph.layout))
    values = ctx.values
    for node in graph.nodes:
        if node.kind == PARAMETER:
            values[node.index] = slots[node.index].take(w)
        elif node.kind == INPUT:
            if node.name not in inputs:
                raise GraphError(f"unbound input: {node.name!r}")
            value = np.asarray(inputs[node.name])
            if value.dtype.kind == "f":
                value = value.astype(DTYPE, copy=False)
            values[node.index] = value
        else:
            xs = [values[i] for i in node.inputs]
            values[node.index] = PRIMITIVES[node.kind].forward(node, xs)
    ctx._bound = (inputs, w)


def _run_tangents(graph: Graph, ctx: EvalContext, v: Array) -> None:
    if v.ndim != 1 or v.size != graph.size:
        raise ShapeMismatchError("direction", v.shape, (graph.size,))

    slots = dict(zip(graph.parameters, graph.layout))
    values, tangents = ctx.values, ctx.tangents
    for node in graph.nodes:
        if node.kind == PARAMETER:
            tangents[node.index] = slots[node.index].take(v)
        elif node.kind == INPUT:
            tangents[node.index] = None
        else:
            dxs = [tangents[i] for i in node.inputs]
            if all(dx is None for dx in dxs):
                tangents[node.index] = None
                continue
            xs = [values[i] for i in node.inputs]
            tangents[node.index] = PRIMITIVES[node.kind].tangent(
                node, xs, dxs, values[node.index]
            )


def _accumulate(buffers: List[Optional[Array]], index: int, contribution) -> None:
    if contribution is None:
        return
    if buffers[index] is None:
        buffers[index] = contribution
    else:
        buffers[index] = buffers[index] + contribution


def _run_reverse(
    graph: Graph,
    ctx: EvalContext,
    value_seeds: Mapping[int, Array],
    tangent_seeds: Optional[Mapping[int, Array]] = None,
) -> Array:
    """
    Propagates adjoints from the seeds back to the parameter leaves and returns
    them flattened in layout order.

    Seeds on tangent buffers run the adjoint of the tangent computation, whose
    value-adjoint contributions are second-order (tangent_vjp).
    """
    adjoints = ctx.adjoints = [None] * len(graph.nodes)
    tangent_adjoints = ctx.tangent_adjoints = [None] * len(graph.nodes)
    for index, seed in value_seeds.items():
        adjoints[index] = seed
    for index, seed in (tangent_seeds or {}).items():
        tangent_adjoints[index] = seed

    needs_adjoint = ctx._needs_adjoint
    values, tangents = ctx.values, ctx.tangents

    for node in reversed(graph.nodes):
        if node.kind in (PARAMETER, INPUT):
            continue
        cot = adjoints[node.index]
        tangent_cot = tangent_adjoints[node.index]
        if cot is None and tangent_cot is None:
            continue

        primitive = PRIMITIVES[node.kind]
        xs = [values[i] for i in node.inputs]
        out = values[node.index]
        needs = [needs_adjoint[i] for i in node.inputs]

        if cot is not None:
            for i, c in zip(node.inputs, primitive.vjp(node, xs, out, cot, needs)):
                _accumulate(adjoints, i, c)

        if tangent_cot is not None:
            dxs = [tangents[i] for i in node.inputs]
            for i, c in zip(node.inputs, primitive.vjp(node, xs, out, tangent_cot, needs)):
                _accumulate(tangent_adjoints, i, c)
            second_order = primitive.tangent_vjp(
                node, xs, dxs, out, tangents[node.index], tangent_cot, needs
            )
            for i, c in zip(node.inputs, second_order):
                _accumulate(adjoints, i, c)

    flat = np.zeros(graph.size, dtype=DTYPE)
    for index, slot in zip(graph.parameters, graph.layout):
        adjoint = adjoints[index]
        if adjoint is not None:
            flat[slot.offset : slot.stop] = np.asarray(adjoint).ravel()
    return flat


def _scalar_loss(graph: Graph, ctx: EvalContext) -> Array:
    value = ctx.values[graph.loss]
    if value is None or np.size(value) != 1:
        shape = () if value is None else np.shape(value)
        raise GraphError(f"loss node is not scalar: shape {shape}")
    return value


def forward(
    graph: Graph,
    inputs: Inputs,
    w,
    ctx: Optional[EvalContext] = None,
    node: Optional[int] = None,
) -> Union[float, Array]:
    """
    Evaluates the graph and returns the value at `node` (the loss by default).
    A size-1 value is returned as a Python float.
    """
    ctx = _context_for(graph, ctx)
    _run_forward(graph, inputs, parameter_values(w), ctx)
    value = ctx.values[graph.loss if node is None else node]
    assert value is not None
    if np.size(value) == 1 and value.dtype.kind == "f":
        return float(np.asarray(value).ravel()[0])
    return value


def grad(graph: Graph, inputs: Inputs, w, ctx: Optional[EvalContext] = None) -> Array:
    """
    ∇ℓ(w) as a flat vector in the canonical flattening order.
    """
    ctx = _context_for(graph, ctx)
    _run_forward(graph, inputs, parameter_values(w), ctx)
    loss = _scalar_loss(graph, ctx)
    return _run_reverse(graph, ctx, {graph.loss: np.ones_like(loss)})


def jvp(
    graph: Graph,
    inputs: Inputs,
    w,
    v: Array,
    ctx: Optional[EvalContext] = None,
    node: Optional[int] = None,
) -> Array:
    """
    The directional derivative J·v of the output node (or `node`) along v.
    """
    ctx = _context_for(graph, ctx)
    _run_forward(graph, inputs, parameter_values(w), ctx)
    _run_tangents(graph, ctx, np.asarray(v, dtype=DTYPE))
    index = graph.output if node is None else node
    tangent = ctx.tangents[index]
    if tangent is None:
        return np.zeros_like(ctx.values[index], dtype=DTYPE)
    return tangent


def hvp(
    graph: Graph, inputs: Inputs, w, v: Array, ctx: Optional[EvalContext] = None
) -> Array:
    """
    H·v where H is the Hessian of the scalar loss: the gradient (L-operator) of
    the directional derivative R_v{ℓ}.
    """
    ctx = _context_for(graph, ctx)
    _run_forward(graph, inputs, parameter_values(w), ctx)
    loss = _scalar_loss(graph, ctx)
    _run_tangents(graph, ctx, np.asarray(v, dtype=DTYPE))
    return _run_reverse(
        graph, ctx, value_seeds={}, tangent_seeds={graph.loss: np.ones_like(loss)}
    )


def batch_size(inputs: Inputs) -> int:
    sizes = {len(value) for value in inputs.values() if np.ndim(value) > 0}
    if not sizes or 0 in sizes:
        return 0
    return min(sizes)


def ggn_vp(
    graph: Graph,
    curvature_batch: Inputs,
    w,
    v: Array,
    ctx: Optional[EvalContext] = None,
) -> Array:
    """
    The generalized Gauss-Newton product G·v = (1/|S_c|) Σ Jᵢᵀ H_ℓ Jᵢ v.

    The batch is handled in one pass: Jv is computed for all samples at once,
    multiplied by each sample's output Hessian, and the result seeds a reverse
    pass from the output node. Since the samples' rows never mix, this is the
    per-sample sum.
    """
    if batch_size(curvature_batch) == 0:
        raise GraphError("curvature batch is empty")

    ctx = _context_for(graph, ctx)
    jv = jvp(graph, curvature_batch, w, v, ctx)
    z = ctx.values[graph.output]
    y = ctx.values[graph.target]
    assert z is not None and y is not None
    n = z.shape[0]
    cotangent = loss_output_hessian_apply(graph.loss_kind, z, y, jv) / n
    return _run_reverse(graph, ctx, {graph.output: cotangent})
