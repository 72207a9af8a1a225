from __future__ import annotations

import numpy as np
import pytest

from metatherm.errors import LengthMismatch, NonFiniteLoss
from metatherm.optim import adam_init, adam_step, grad_central_diff


def test_adam_first_step_is_lr_times_sign():
    # bias correction makes the first update lr * g / (|g| + eps)
    state = adam_init(3, lr=0.05)
    params = np.zeros(3)
    grads = np.array([1.0, -2.0, 0.5])
    state, params = adam_step(state, params, grads)
    assert np.abs(params - (-0.05) * np.sign(grads)).max() < 1e-6
    assert state.step == 1


def test_adam_zero_gradient_is_fixed_point():
    state = adam_init(2, lr=0.1)
    params = np.array([0.3, -0.7])
    for _ in range(5):
        state, params = adam_step(state, params, np.zeros(2))
    assert np.array_equal(params, np.array([0.3, -0.7]))


def test_adam_converges_on_quadratic():
    state = adam_init(2, lr=0.1)
    params = np.array([3.0, -2.0])
    target = np.array([1.0, 1.0])
    for _ in range(500):
        state, params = adam_step(state, params, 2.0 * (params - target))
    assert np.abs(params - target).max() < 1e-3


def test_adam_state_not_mutated():
    state = adam_init(2, lr=0.1)
    m0 = state.m.copy()
    adam_step(state, np.zeros(2), np.ones(2))
    assert np.array_equal(state.m, m0)
    assert state.step == 0


def test_adam_shape_mismatch():
    state = adam_init(3, lr=0.1)
    with pytest.raises(LengthMismatch):
        adam_step(state, np.zeros(2), np.zeros(2))
    with pytest.raises(LengthMismatch):
        adam_step(state, np.zeros(3), np.zeros(4))


def test_central_diff_exact_on_quadratic():
    # central differences are exact for quadratics up to roundoff
    A = np.array([[2.0, 0.5], [0.5, 1.0]])

    def loss(p):
        return 0.5 * p @ A @ p

    p0 = np.array([0.7, -1.2])
    g = grad_central_diff(loss, p0, step=1e-3)
    assert np.abs(g - A @ p0).max() < 1e-9


def test_central_diff_richardson_ratio():
    # error is O(step^2): quartering the step cuts the error ~16x
    def loss(p):
        return float(np.sin(p[0]) + np.cos(2 * p[0]))

    p0 = np.array([0.3])
    exact = np.cos(0.3) - 2 * np.sin(0.6)
    e1 = abs(grad_central_diff(loss, p0, step=2e-2)[0] - exact)
    e2 = abs(grad_central_diff(loss, p0, step=5e-3)[0] - exact)
    assert 10.0 < e1 / e2 < 22.0


def test_central_diff_probes_one_coordinate_at_a_time():
    calls = []

    def loss(p):
        calls.append(p.copy())
        return float(p @ p)

    grad_central_diff(loss, np.zeros(3), step=0.1)
    assert len(calls) == 6
    for c in calls:
        assert np.count_nonzero(c) == 1


def test_central_diff_step_validation():
    with pytest.raises(ValueError):
        grad_central_diff(lambda p: 0.0, np.zeros(1), step=0.0)
    with pytest.raises(ValueError):
        grad_central_diff(lambda p: 0.0, np.zeros(1), step=-1e-3)


def test_central_diff_rejects_non_finite_loss():
    def loss(p):
        return np.inf if p[0] > 0 else 0.0

    with pytest.raises(NonFiniteLoss):
        grad_central_diff(loss, np.zeros(1), step=0.1)
