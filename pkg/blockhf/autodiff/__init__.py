"""
Forward evaluation, reverse-mode gradients (L-operator), forward-mode
directional derivatives (R-operator) and curvature-vector products.
"""

from .evaluate import EvalContext, forward, ggn_vp, grad, hvp, jvp
from .graph import Constant, Graph, GraphBuilder, LeafSlot, Ref, Uniform
from .losses import MSE, SOFTMAX_XENT, loss_output_hessian_apply

__all__ = [
    "Constant",
    "EvalContext",
    "Graph",
    "GraphBuilder",
    "LeafSlot",
    "MSE",
    "Ref",
    "SOFTMAX_XENT",
    "Uniform",
    "forward",
    "ggn_vp",
    "grad",
    "hvp",
    "jvp",
    "loss_output_hessian_apply",
]
