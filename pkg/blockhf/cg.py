#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
Damped, truncated, warm-started linear conjugate gradient.

cg_solve minimizes the quadratic model

    q(x) = xᵀg + ½ xᵀĜx

by solving Ĝx = −g. The solver owns that sign convention: its solution is the
update direction itself and callers never negate it.
"""

import logging
import math
from typing import Callable, List, Union

import attr
import numpy as np

from .errors import ShapeMismatchError
from .linalg import DTYPE, dot, ensure_finite, norm

logger = logging.getLogger(__name__)

# Termination reasons
MAX_ITERS = "max_iters"
CONVERGED = "converged"
PROGRESS = "progress"
NEGATIVE_CURVATURE = "negative_curvature"


@attr.s(auto_attribs=True, frozen=True)
class LinearOperator:
    """
    A matrix-free symmetric map of R^n to itself. By contract, matvec is
    symmetric positive semidefinite and deterministic.
    """

    dimension: int
    matvec: Callable[[np.ndarray], np.ndarray]

    def apply(self, v: np.ndarray) -> np.ndarray:
        if v.shape != (self.dimension,):
            raise ShapeMismatchError("operator input", v.shape, (self.dimension,))
        out = self.matvec(v)
        if out.shape != (self.dimension,):
            raise ShapeMismatchError("operator output", out.shape, (self.dimension,))
        return out


def _positive(instance, attribute, value) -> None:
    if not value > 0:
        raise ValueError(f"{attribute.name} must be positive, got {value}")


def _at_least_one(instance, attribute, value) -> None:
    if value < 1:
        raise ValueError(f"{attribute.name} must be at least 1, got {value}")


@attr.s(auto_attribs=True, frozen=True)
class RelativeResidual:
    """
    Stop when ‖r_k‖ ≤ tol·‖g‖.
    """

    tol: float = attr.ib(default=1e-4, validator=_positive)
    name = "relative_residual"


@attr.s(auto_attribs=True, frozen=True)
class QuadraticProgress:
    """
    Relative per-iteration progress: after iteration i, with j = max(window,
    ceil(0.1·i)), stop when i > j, q_i < 0 and (q_i − q_{i−j}) / q_i < j·tol.
    """

    tol: float = attr.ib(default=5e-4, validator=_positive)
    window: int = attr.ib(default=10, validator=_at_least_one)
    name = "quadratic_progress"

    def satisfied(self, q_history: List[float]) -> bool:
        i = len(q_history) - 1
        j = max(self.window, math.ceil(0.1 * i))
        if i <= j:
            return False
        q = q_history[-1]
        if not q < 0:
            return False
        return (q - q_history[i - j]) / q < j * self.tol


StopCriterion = Union[RelativeResidual, QuadraticProgress]


def _non_negative(instance, attribute, value) -> None:
    if value < 0:
        raise ValueError(f"{attribute.name} must be non-negative, got {value}")


@attr.s(auto_attribs=True, frozen=True)
class CGConfig:
    max_iters: int = attr.ib(default=30, validator=_non_negative)
    stop_criterion: StopCriterion = attr.ib(factory=RelativeResidual)
    damping: float = attr.ib(default=0.0, validator=_non_negative)


@attr.s(auto_attribs=True, frozen=True, eq=False)
class CGResult:
    x: np.ndarray
    iterations: int
    residual_norm: float
    q_history: List[float]
    reason: str

    @property
    def q(self) -> float:
        """
        Quadratic-model value at the returned solution.
        """
        return self.q_history[-1]


def damp(op: LinearOperator, d: float) -> LinearOperator:
    """
    Tikhonov damping: Ĝ = G + dI.
    """
    if d < 0:
        raise ValueError(f"damping must be non-negative, got {d}")
    if d == 0:
        return op
    return LinearOperator(op.dimension, lambda v: op.apply(v) + d * v)


def quadratic_value(op: LinearOperator, g: np.ndarray, x: np.ndarray) -> float:
    """
    q(x) = xᵀg + ½ xᵀ(op x)
    """
    if g.shape != x.shape:
        raise ShapeMismatchError("quadratic_value", g.shape, x.shape)
    return dot(x, g) + 0.5 * dot(x, op.apply(x))


def assemble_dense(op: LinearOperator) -> np.ndarray:
    """
    The operator's matrix, column by column from op(eᵢ). Only sensible for small n.
    """
    n = op.dimension
    dense = np.empty((n, n), dtype=DTYPE)
    basis = np.zeros(n, dtype=DTYPE)
    for i in range(n):
        basis[i] = 1.0
        dense[:, i] = op.apply(basis)
        basis[i] = 0.0
    return dense


def cg_solve(
    op: LinearOperator, g: np.ndarray, x0: np.ndarray, cfg: CGConfig
) -> CGResult:
    """
    Runs CG on Ĝx = −g from x0, where op is Ĝ (already damped).

    Stops after cfg.max_iters iterations, when the stop criterion holds, or when a
    search direction has pᵀĜp ≤ 0, in which case the current iterate is returned.
    q_history starts with q(x0) and gains one entry per iteration.
    """
    n = op.dimension
    if g.shape != (n,):
        raise ShapeMismatchError("cg gradient", g.shape, (n,))
    if x0.shape != (n,):
        raise ShapeMismatchError("cg warm start", x0.shape, (n,))
    ensure_finite("CG inputs", g, x0)

    criterion = cfg.stop_criterion
    g_norm = norm(g)

    x = np.array(x0, dtype=DTYPE)
    r = -g - op.apply(x)
    ensure_finite("CG initial residual", r)
    p = r.copy()
    rr = dot(r, r)
    # Ĝx = −g − r, hence q(x) = ½ xᵀ(g − r): no extra operator application.
    q_history = [0.5 * dot(x, g - r)]

    def residual_converged(rr: float) -> bool:
        return isinstance(criterion, RelativeResidual) and math.sqrt(rr) <= criterion.tol * g_norm

    iterations = 0
    reason = MAX_ITERS
    if rr == 0.0 or residual_converged(rr):
        reason = CONVERGED
    else:
        while iterations < cfg.max_iters:
            Ap = op.apply(p)
            ensure_finite("curvature-vector product", Ap, iteration=iterations)
            pAp = dot(p, Ap)
            if pAp <= 0:
                logger.warning(
                    "non-positive curvature pᵀĜp = %g at iteration %d; stopping early",
                    pAp,
                    iterations,
                )
                reason = NEGATIVE_CURVATURE
                break

            alpha = rr / pAp
            x = x + alpha * p
            r = r - alpha * Ap
            rr_next = dot(r, r)
            iterations += 1
            q_history.append(0.5 * dot(x, g - r))

            if rr_next == 0.0 or residual_converged(rr_next):
                reason = CONVERGED
                rr = rr_next
                break
            if isinstance(criterion, QuadraticProgress) and criterion.satisfied(q_history):
                reason = PROGRESS
                rr = rr_next
                break

            beta = rr_next / rr
            p = r + beta * p
            rr = rr_next

    ensure_finite("CG solution", x, iterations=iterations)
    logger.debug(
        "CG: n=%d iterations=%d reason=%s q=%g", n, iterations, reason, q_history[-1]
    )
    return CGResult(
        x=x,
        iterations=iterations,
        residual_norm=math.sqrt(rr),
        q_history=q_history,
        reason=reason,
    )
