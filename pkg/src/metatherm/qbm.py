"""Generative quantum Boltzmann machine on a frozen Gibbs-state preparer.

The model distribution is the computational-basis diagonal of the prepared
thermal state.  Training moves only the Hamiltonian coefficients fed to the
preparer; the preparer's own parameters are never touched, so each epoch costs
one loss evaluation plus two finite-difference probes per coefficient and
nothing else.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .circuits import reduced_states_batch, simulate_batch
from .errors import (
    CheckpointMismatch,
    ConfigInvalid,
    NonFiniteLoss,
    NotNormalized,
)
from .hamiltonians import HamiltonianFamily
from .linalg import check_density_matrix, kl_divergence, trace_distance
from .oracle import exact_gibbs
from .seeding import stream
from .trainers import Checkpoint, _probe_delta

SCHEMA_VERSION = "1.0.0"


def visible_distribution(rho: np.ndarray) -> np.ndarray:
    """Computational-basis outcome probabilities of a state with every qubit visible."""
    check_density_matrix(rho)
    return np.diagonal(rho).real.copy()


def qbm_loss(p_target: np.ndarray, rho_model: np.ndarray) -> float:
    """KL divergence from the model's visible distribution to the target."""
    return kl_divergence(p_target, visible_distribution(rho_model))


@dataclass
class QbmConfig:
    p_target: np.ndarray
    preparer: Checkpoint
    family: HamiltonianFamily | None = None  # defaults to the preparer's family
    beta: float = 1.0
    epochs: int = 200
    lr: float = 0.1
    grad_step: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        self.p_target = np.asarray(self.p_target, dtype=float)
        dim = 1 << self.preparer.spec.n_system
        if self.p_target.shape != (dim,):
            raise ConfigInvalid(
                f"target has {self.p_target.shape} entries, preparer emits {dim} outcomes"
            )
        if np.any(self.p_target < 0) or abs(self.p_target.sum() - 1.0) > 1e-9:
            raise NotNormalized("target is not a probability vector")
        problems = []
        if self.beta <= 0:
            problems.append(f"beta must be positive, got {self.beta}")
        if self.epochs < 0:
            problems.append(f"epochs must be nonnegative, got {self.epochs}")
        if self.lr <= 0:
            problems.append(f"lr must be positive, got {self.lr}")
        if self.grad_step <= 0:
            problems.append(f"grad_step must be positive, got {self.grad_step}")
        if problems:
            raise ConfigInvalid("; ".join(problems))
        if self.family is None:
            self.family = self.preparer.family
        elif self.family.to_dict() != self.preparer.family.to_dict():
            raise CheckpointMismatch(
                "run family differs from the family the preparer was trained on"
            )
        if abs(self.beta - self.preparer.beta) > 1e-12:
            raise CheckpointMismatch(
                f"run beta {self.beta} differs from the preparer's {self.preparer.beta}"
            )


@dataclass
class QbmReport:
    kl_history: np.ndarray
    trace_distance_history: np.ndarray
    final_params: np.ndarray
    final_p_model: np.ndarray | None
    invocations: int
    wall_time_s: float

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kl_history": self.kl_history.tolist(),
            "trace_distance_history": self.trace_distance_history.tolist(),
            "final_params": self.final_params.tolist(),
            "final_p_model": None
            if self.final_p_model is None
            else self.final_p_model.tolist(),
            "invocations": self.invocations,
            "wall_time_s": self.wall_time_s,
        }


def train_qbm(config: QbmConfig) -> QbmReport:
    """Gradient descent on the Hamiltonian coefficients of a frozen preparer.

    Per epoch: one batched preparer call covering the loss point and both
    central-difference probes of every coefficient, a plain descent step of
    size lr, and an exact-Gibbs trace distance logged at the pre-update point.
    """
    t0 = time.perf_counter()
    ck = config.preparer
    family = config.family
    n_params = family.param_dim
    coeffs = stream(config.seed, "qbm-init").uniform(-1.0, 1.0, n_params)
    delta = _probe_delta(n_params, config.grad_step)
    n_probe = delta.shape[1]
    kl = np.empty(config.epochs)
    td = np.empty(config.epochs)
    p_model = None
    invocations = 0
    for epoch in range(config.epochs):
        h_cols = coeffs[:, None] + delta
        trainables, externals = ck.angle_stores(h_cols)
        states = simulate_batch(ck.spec, trainables, externals, h_cols)
        invocations += n_probe
        rhos = reduced_states_batch(states, ck.spec.n_system)
        probs = np.diagonal(rhos, axis1=1, axis2=2).real
        losses = np.array(
            [kl_divergence(config.p_target, probs[c]) for c in range(n_probe)]
        )
        if not np.all(np.isfinite(losses)):
            raise NonFiniteLoss(f"non-finite KL at epoch {epoch}")
        kl[epoch] = losses[0]
        p_model = probs[0]
        td[epoch] = trace_distance(
            rhos[0], exact_gibbs(family.build(coeffs), config.beta).gibbs_state
        )
        grads = (losses[1::2] - losses[2::2]) / (2.0 * config.grad_step)
        coeffs = coeffs - config.lr * grads
    return QbmReport(
        kl_history=kl,
        trace_distance_history=td,
        final_params=coeffs,
        final_p_model=p_model,
        invocations=invocations,
        wall_time_s=time.perf_counter() - t0,
    )
