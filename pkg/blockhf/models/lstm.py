#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
Stacked peephole LSTM classifier, unrolled over a fixed number of steps.

Per layer and step, with diagonal peepholes w_c·:

    i_t = σ(W_xi x_t + W_hi h_{t−1} + w_ci ⊙ c_{t−1} + b_i)
    f_t = σ(W_xf x_t + W_hf h_{t−1} + w_cf ⊙ c_{t−1} + b_f)
    c_t = f_t ⊙ c_{t−1} + i_t ⊙ tanh(W_xc x_t + W_hc h_{t−1} + b_c)
    o_t = σ(W_xo x_t + W_ho h_{t−1} + w_co ⊙ c_t + b_o)
    h_t = o_t ⊙ tanh(c_t)

with h_0 = c_0 = 0. A fully-connected layer on the top layer's last hidden state
produces the logits, trained with softmax cross-entropy.

The four input matrices of a layer are stored side by side as W_x with columns
[i | f | c | o], likewise W_h; the input at step t is columns
[t·F, (t+1)·F) of the input row.
"""

from typing import List, Optional

from ..autodiff.graph import Constant, Graph, GraphBuilder, Ref, Uniform
from ..errors import ConfigError
from ..linalg import glorot_bound
from .spec import STACKED_LSTM, ModelSpec

GATES = ("i", "f", "c", "o")


class _Layer:
    def __init__(self, builder: GraphBuilder, index: int, fan_in: int, spec: ModelSpec):
        H = spec.hidden
        prefix = f"lstm.{index}"
        self.builder = builder
        self.hidden = H
        self.W_x = builder.parameter(
            f"{prefix}.W_x", (fan_in, 4 * H), Uniform(glorot_bound(fan_in, H))
        )
        self.W_h = builder.parameter(
            f"{prefix}.W_h", (H, 4 * H), Uniform(glorot_bound(H, H))
        )
        self.bias = {
            gate: builder.parameter(
                f"{prefix}.b_{gate}",
                (H,),
                Constant(spec.forget_bias if gate == "f" else 0.0),
            )
            for gate in GATES
        }
        self.peephole = {
            gate: builder.parameter(f"{prefix}.w_c{gate}", (H,), Constant(0.0))
            for gate in ("i", "f", "o")
        }

    def _gate_input(self, pre: Ref, gate: str) -> Ref:
        H = self.hidden
        column = GATES.index(gate)
        b = self.builder
        return b.add(b.slice(pre, column * H, (column + 1) * H), self.bias[gate])

    def _peep(self, a: Ref, c: Optional[Ref], gate: str) -> Ref:
        if c is None:
            return a
        b = self.builder
        return b.add(a, b.mul(c, self.peephole[gate]))

    def step(self, x_t: Ref, h: Optional[Ref], c: Optional[Ref]):
        b = self.builder
        pre = b.matmul(x_t, self.W_x)
        if h is not None:
            pre = b.add(pre, b.matmul(h, self.W_h))

        i = b.sigmoid(self._peep(self._gate_input(pre, "i"), c, "i"))
        candidate = b.tanh(self._gate_input(pre, "c"))
        if c is None:
            # c_0 = 0, so the forget gate has nothing to act on.
            c_new = b.mul(i, candidate)
        else:
            f = b.sigmoid(self._peep(self._gate_input(pre, "f"), c, "f"))
            c_new = b.add(b.mul(f, c), b.mul(i, candidate))
        o = b.sigmoid(self._peep(self._gate_input(pre, "o"), c_new, "o"))
        h_new = b.mul(o, b.tanh(c_new))
        return h_new, c_new


def build_stacked_lstm(spec: ModelSpec) -> Graph:
    if spec.kind != STACKED_LSTM:
        raise ConfigError(f"not a stacked LSTM spec: {spec.kind}", key="model.kind")
    if spec.steps <= 0:
        raise ConfigError("sequence has zero length", key="model.steps")

    builder = GraphBuilder()
    x = builder.input("x")
    labels = builder.input("y")

    F = spec.input_size
    sequence: List[Ref] = [builder.slice(x, t * F, (t + 1) * F) for t in range(spec.steps)]

    fan_in = F
    for index in range(spec.layers):
        layer = _Layer(builder, index, fan_in, spec)
        h: Optional[Ref] = None
        c: Optional[Ref] = None
        outputs = []
        for x_t in sequence:
            h, c = layer.step(x_t, h, c)
            outputs.append(h)
        sequence = outputs
        fan_in = spec.hidden

    W = builder.parameter(
        "head.W", (spec.hidden, spec.classes), Uniform(glorot_bound(spec.hidden, spec.classes))
    )
    b = builder.parameter("head.b", (spec.classes,), Constant(0.0))
    logits = builder.add(builder.matmul(sequence[-1], W), b)
    return builder.build(output=logits, loss=builder.softmax_xent(logits, labels))
