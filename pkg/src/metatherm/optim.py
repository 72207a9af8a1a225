"""Adam and central-difference gradients."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import LengthMismatch, NonFiniteLoss

DEFAULT_GRAD_STEP = 1e-4


@dataclass
class AdamState:
    lr: float
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def adam_init(n_params: int, lr: float) -> AdamState:
    return AdamState(lr=lr, m=np.zeros(n_params), v=np.zeros(n_params))


def adam_step(state: AdamState, params: np.ndarray, grads: np.ndarray):
    """One bias-corrected update; returns (new_state, new_params)."""
    if params.shape != grads.shape or params.shape != state.m.shape:
        raise LengthMismatch(
            f"params {params.shape}, grads {grads.shape}, state {state.m.shape}"
        )
    t = state.step + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    v = state.beta2 * state.v + (1.0 - state.beta2) * grads**2
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    new_params = params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    new_state = AdamState(
        lr=state.lr, m=m, v=v, step=t,
        beta1=state.beta1, beta2=state.beta2, eps=state.eps,
    )
    return new_state, new_params


def grad_central_diff(loss, params: np.ndarray, step: float = DEFAULT_GRAD_STEP) -> np.ndarray:
    """g_i = (L(p + step e_i) - L(p - step e_i)) / (2 step), one coordinate at a time."""
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    params = np.asarray(params, dtype=float)
    g = np.zeros_like(params)
    for i in range(params.size):
        probe = params.copy()
        probe[i] = params[i] + step
        up = loss(probe)
        probe[i] = params[i] - step
        down = loss(probe)
        if not (np.isfinite(up) and np.isfinite(down)):
            raise NonFiniteLoss(f"loss non-finite near coordinate {i}")
        g[i] = (up - down) / (2.0 * step)
    return g
