#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
Adam, Polyak averaging, and the trainer state they share with HF.
"""

import numpy as np
import pytest

from blockhf.autodiff.graph import LeafSlot
from blockhf.errors import NumericalError, ShapeMismatchError
from blockhf.linalg import Rng
from blockhf.models.params import ParamVector
from blockhf.optim.adam import AdamConfig, adam_step
from blockhf.optim.partition import single
from blockhf.optim.polyak import polyak_update
from blockhf.optim.state import TrainerState


def fresh_state(values) -> TrainerState:
    values = np.asarray(values, dtype=float)
    w = ParamVector(values, (LeafSlot("w", 0, values.shape),))
    return TrainerState.initial(w, Rng(0))


def test_first_adam_step_is_a_sign_step():
    cfg = AdamConfig()
    g = np.array([3.0, -0.5, 2e-3, -40.0])
    stepped = adam_step(fresh_state(np.zeros(4)), g, cfg)
    # at t = 1 both bias corrections are exact: m̂ = g, v̂ = g²
    expected = -cfg.learning_rate * g / (np.abs(g) + cfg.epsilon)
    assert np.allclose(stepped.w.values, expected, rtol=1e-12, atol=0)
    assert np.allclose(stepped.w.values, -cfg.learning_rate * np.sign(g), rtol=1e-5)
    assert stepped.adam_t == 1
    assert stepped.k == 1


def test_zero_gradient_is_a_fixed_point():
    state = fresh_state([1.0, -2.0])
    for _ in range(5):
        state = adam_step(state, np.zeros(2), AdamConfig())
    assert np.array_equal(state.w.values, [1.0, -2.0])
    assert state.adam_t == 5


def test_constant_gradient():
    cfg = AdamConfig(learning_rate=0.01)
    g = np.array([0.5, -2.0])
    state = fresh_state(np.zeros(2))
    for t in range(1, 11):
        before = state.w.values
        state = adam_step(state, g, cfg)
        m_hat = state.adam_m / (1 - cfg.beta1 ** t)
        v_hat = state.adam_v / (1 - cfg.beta2 ** t)
        assert np.allclose(m_hat, g, rtol=1e-12)
        assert np.allclose(v_hat, g * g, rtol=1e-12)
        step = state.w.values - before
        expected = -cfg.learning_rate * np.sign(g) / (1 + cfg.epsilon / np.abs(g))
        assert np.allclose(step, expected, rtol=1e-10)


def test_adam_checks_the_gradient():
    with pytest.raises(ShapeMismatchError):
        adam_step(fresh_state(np.zeros(3)), np.zeros(2), AdamConfig())
    with pytest.raises(NumericalError):
        adam_step(fresh_state(np.zeros(2)), np.array([1.0, np.inf]), AdamConfig())


@pytest.mark.parametrize(
    "kwargs",
    [{"learning_rate": -1.0}, {"beta1": 1.0}, {"beta2": -0.1}, {"epsilon": 0.0}, {"batch_size": 0}],
)
def test_adam_config_validation(kwargs):
    with pytest.raises(ValueError):
        AdamConfig(**kwargs)


def test_polyak_closed_form():
    avg = np.zeros(3)
    for t in range(1, 101):
        avg = polyak_update(avg, np.ones(3), 0.99)
        if t == 1:
            assert np.allclose(avg, 0.01)
    assert np.allclose(avg, 1 - 0.99 ** 100)
    assert avg[0] == pytest.approx(0.633968, abs=1e-6)


def test_polyak_without_decay_copies():
    w = np.array([1.0, 2.0])
    avg = polyak_update(np.zeros(2), w, 0.0)
    assert np.array_equal(avg, w)
    assert avg is not w


def test_polyak_fixed_point():
    w = np.array([0.25, -4.0])
    assert np.allclose(polyak_update(w.copy(), w, 0.99), w)


@pytest.mark.parametrize("decay", [-0.1, 1.0])
def test_polyak_decay_range(decay):
    with pytest.raises(ValueError):
        polyak_update(np.zeros(2), np.ones(2), decay)


def test_initial_state():
    values = np.array([1.0, 2.0, 3.0])
    w = ParamVector(values, (LeafSlot("w", 0, (3,)),))
    state = TrainerState.initial(w, Rng(0), single(w.layout), polyak=True)
    assert [s.tolist() for s in state.block_solutions] == [[0.0, 0.0, 0.0]]
    assert np.array_equal(state.polyak, values)
    assert state.polyak is not values
    assert np.array_equal(state.evaluation_parameters.values, values)
    assert state.k == 0


def test_evaluation_uses_the_average():
    state = fresh_state([1.0, 1.0])
    assert state.evaluation_parameters is state.w
    averaged = TrainerState.initial(state.w, Rng(0), polyak=True)
    assert averaged.evaluation_parameters is not averaged.w


def test_state_checks_vector_shapes():
    w = ParamVector(np.zeros(2), (LeafSlot("w", 0, (2,)),))
    with pytest.raises(ShapeMismatchError):
        TrainerState(w=w, rng=Rng(0), polyak=np.zeros(3))
