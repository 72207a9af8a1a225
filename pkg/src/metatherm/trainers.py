"""Trainers for meta-learned Gibbs-state preparation.

Three training modes share one batched evaluation engine:

- meta: circuit angles live in a trainable store, Hamiltonian parameters enter
  the circuit through trainable linear encodings; the loss is the sum of
  variational free energies over the training set.
- nn-meta: a small network maps Hamiltonian parameters to every circuit angle;
  gradients chain an analytic network backward pass with central-difference
  circuit-angle gradients.
- single-point warm start: tune the circuit angles at one fixed parameter
  value, starting either from meta-trained values or from scratch.

Every finite-difference probe of every training point is one batch column, so
an epoch costs a single batched simulation.  Columns are evaluated
independently, which keeps batched results bitwise equal to serial ones.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .circuits import (
    AnsatzSpec,
    build_external_ansatz,
    build_meta_ansatz,
    externals_to_trainables,
    reduced_states_batch,
    simulate_batch,
    spec_from_dict,
    spec_to_dict,
    check_schema_version,
)
from .errors import CheckpointMismatch, ConfigInvalid, DegenerateDenominator, NonFiniteLoss
from .hamiltonians import HamiltonianFamily, expectation, to_dense
from .mlp import Mlp, init_mlp
from .optim import DEFAULT_GRAD_STEP, adam_init, adam_step
from .oracle import exact_gibbs
from .seeding import stream

SCHEMA_VERSION = "1.0.0"

# Cap on complex entries held by one simulated batch; larger batches are
# evaluated in column chunks (identical values, bounded memory).
MAX_BATCH_ELEMENTS = 1 << 22


def _entropies(rhos: np.ndarray) -> np.ndarray:
    w = np.linalg.eigvalsh(rhos)
    terms = np.where(
        w > linalg.ENTROPY_CLAMP, w * np.log(np.maximum(w, 1e-300)), 0.0
    )
    return -terms.sum(axis=-1)


def _free_energy_columns(
    spec: AnsatzSpec,
    trainables,
    externals,
    h_cols: np.ndarray,
    denses: np.ndarray,
    point_of_col: np.ndarray,
    T: float,
) -> np.ndarray:
    """Variational free energy per batch column.

    denses[i] is the dense system Hamiltonian of training point i and
    point_of_col maps columns to points.
    """
    B = h_cols.shape[1]
    dim = 1 << spec.n_tot
    out = np.empty(B)
    chunk = max(1, MAX_BATCH_ELEMENTS // dim)

    def cols(arr, lo, hi):
        if arr is None or np.ndim(arr) == 1:
            return arr
        return arr[:, lo:hi]

    for lo in range(0, B, chunk):
        hi = min(B, lo + chunk)
        states = simulate_batch(
            spec, cols(trainables, lo, hi), cols(externals, lo, hi), h_cols[:, lo:hi]
        )
        rhos = reduced_states_batch(states, spec.n_system)
        energy = np.einsum(
            "bst,bts->b", rhos, denses[point_of_col[lo:hi]], optimize=True
        ).real
        out[lo:hi] = energy - T * _entropies(rhos)
    return out


def _point_major(base: np.ndarray, delta: np.ndarray, m: int) -> np.ndarray:
    """Columns [rows, m * n_probe]: per point, the base column plus all probes.

    base is one shared column, or one column per point.
    """
    if base.shape[1] != 1:
        base = np.repeat(base, delta.shape[1], axis=1)
    return base + np.tile(delta, (1, m))


def _probe_delta(n_params: int, step: float) -> np.ndarray:
    """Column 0 is the unperturbed point; columns 1+2j / 2+2j are +-step on coordinate j."""
    delta = np.zeros((n_params, 2 * n_params + 1))
    for j in range(n_params):
        delta[j, 1 + 2 * j] = step
        delta[j, 2 + 2 * j] = -step
    return delta


def _dense_stack(family: HamiltonianFamily, h_train: np.ndarray) -> np.ndarray:
    return np.stack([to_dense(family.build(h)) for h in h_train])


def _check_h_train(family: HamiltonianFamily, h_train) -> np.ndarray:
    h = np.asarray(h_train, dtype=float)
    if h.ndim == 1:
        h = h[:, None]
    if h.ndim != 2 or h.shape[0] == 0 or h.shape[1] != family.param_dim:
        raise ConfigInvalid(
            f"training points must be [m, {family.param_dim}], got {h.shape}"
        )
    return h


@dataclass
class MetaTrainConfig:
    family: HamiltonianFamily
    h_train: np.ndarray
    beta: float = 1.0
    epochs: int = 500
    lr: float = 0.01
    seed: int = 0
    l_enc: int = 2
    l_hva: int = 2
    grad_step: float = DEFAULT_GRAD_STEP

    def __post_init__(self):
        self.h_train = _check_h_train(self.family, self.h_train)
        problems = []
        if self.beta <= 0:
            problems.append(f"beta must be positive, got {self.beta}")
        if self.epochs < 0:
            problems.append(f"epochs must be nonnegative, got {self.epochs}")
        if self.lr <= 0:
            problems.append(f"lr must be positive, got {self.lr}")
        if self.l_enc < 1:
            problems.append(f"need at least one encoding layer, got {self.l_enc}")
        if self.l_hva < 0:
            problems.append(f"negative HVA layer count {self.l_hva}")
        if self.grad_step <= 0:
            problems.append(f"grad_step must be positive, got {self.grad_step}")
        if problems:
            raise ConfigInvalid("; ".join(problems))


@dataclass
class NnTrainConfig:
    family: HamiltonianFamily
    h_train: np.ndarray
    beta: float = 1.0
    epochs: int = 500
    lr: float = 0.001
    seed: int = 0
    l_su2: int = 4
    l_hva: int = 0
    hidden: tuple[int, ...] = (16, 16, 16)
    grad_step: float = DEFAULT_GRAD_STEP

    def __post_init__(self):
        self.h_train = _check_h_train(self.family, self.h_train)
        problems = []
        if self.beta <= 0:
            problems.append(f"beta must be positive, got {self.beta}")
        if self.epochs < 0:
            problems.append(f"epochs must be nonnegative, got {self.epochs}")
        if self.lr <= 0:
            problems.append(f"lr must be positive, got {self.lr}")
        if self.l_su2 < 1:
            problems.append(f"need at least one SU2 layer, got {self.l_su2}")
        if self.l_hva < 0:
            problems.append(f"negative HVA layer count {self.l_hva}")
        if not self.hidden or any(w < 1 for w in self.hidden):
            problems.append(f"bad hidden widths {self.hidden}")
        if self.grad_step <= 0:
            problems.append(f"grad_step must be positive, got {self.grad_step}")
        if problems:
            raise ConfigInvalid("; ".join(problems))


@dataclass
class Checkpoint:
    """A trained preparer: the circuit plus whatever fills its angle stores."""

    kind: str  # "meta" (trainable angles) or "nn-meta" (network-supplied angles)
    family: HamiltonianFamily
    beta: float
    spec: AnsatzSpec
    trainables: np.ndarray | None = None
    net: Mlp | None = None
    seed: int | None = None
    config_hash: str | None = None

    def angle_stores(self, h: np.ndarray):
        """(trainables, externals) column arrays for parameter columns h [p, B]."""
        if self.kind == "meta":
            return self.trainables, None
        return None, self.net.forward(h)

    def to_dict(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "family": self.family.to_dict(),
            "beta": self.beta,
            "ansatz": spec_to_dict(self.spec),
        }
        if self.trainables is not None:
            out["trainables"] = self.trainables.tolist()
        if self.net is not None:
            out["mlp"] = self.net.to_dict()
        if self.seed is not None:
            out["seed"] = self.seed
        if self.config_hash is not None:
            out["config_hash"] = self.config_hash
        return out

    @staticmethod
    def from_dict(d: dict) -> "Checkpoint":
        check_schema_version(d.get("schema_version", "0"))
        kind = d["kind"]
        if kind not in ("meta", "nn-meta"):
            raise CheckpointMismatch(f"unknown checkpoint kind {kind!r}")
        spec = spec_from_dict(d["ansatz"])
        trainables = None
        net = None
        if kind == "meta":
            if "trainables" not in d:
                raise CheckpointMismatch("meta checkpoint lacks trainables")
            trainables = np.asarray(d["trainables"], dtype=float)
            if trainables.shape != (spec.n_trainable,):
                raise CheckpointMismatch(
                    f"{trainables.shape[0]} trainables for a spec wanting {spec.n_trainable}"
                )
        else:
            if "mlp" not in d:
                raise CheckpointMismatch("nn-meta checkpoint lacks the network")
            net = Mlp.from_dict(d["mlp"])
            if net.layer_sizes[-1] != spec.n_external:
                raise CheckpointMismatch(
                    f"network emits {net.layer_sizes[-1]} angles, spec wants {spec.n_external}"
                )
        return Checkpoint(
            kind=kind,
            family=HamiltonianFamily.from_dict(d["family"]),
            beta=float(d["beta"]),
            spec=spec,
            trainables=trainables,
            net=net,
            seed=d.get("seed"),
            config_hash=d.get("config_hash"),
        )


def save_checkpoint(path: str, checkpoint: Checkpoint) -> None:
    from .records import write_json

    write_json(path, checkpoint.to_dict())


def load_checkpoint(path: str) -> Checkpoint:
    from .records import read_json

    return Checkpoint.from_dict(read_json(path))


@dataclass
class TrainReport:
    loss_history: np.ndarray
    per_h_free_energy: np.ndarray
    wall_time_s: float
    checkpoint: Checkpoint
    final_fidelity: float | None = None

    def to_dict(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "loss_history": self.loss_history.tolist(),
            "per_h_free_energy": self.per_h_free_energy.tolist(),
            "wall_time_s": self.wall_time_s,
            "checkpoint": self.checkpoint.to_dict(),
        }
        if self.final_fidelity is not None:
            out["final_fidelity"] = self.final_fidelity
        return out


def global_loss(spec, trainables, family, h_train, beta) -> float:
    """Sum of variational free energies over the training points."""
    h = _check_h_train(family, h_train)
    m = h.shape[0]
    G = _free_energy_columns(
        spec,
        np.asarray(trainables, dtype=float),
        None,
        h.T.copy(),
        _dense_stack(family, h),
        np.arange(m),
        1.0 / beta,
    )
    if not np.all(np.isfinite(G)):
        raise NonFiniteLoss("non-finite free energy in the training sum")
    return float(G.sum())


def train_meta_vqt(config: MetaTrainConfig) -> TrainReport:
    """Full-batch Adam on the summed free energy of the encoding ansatz."""
    t0 = time.perf_counter()
    family = config.family
    spec = build_meta_ansatz(family, config.l_enc, config.l_hva)
    theta = stream(config.seed, "meta-init").uniform(-np.pi, np.pi, spec.n_trainable)
    h = config.h_train
    m = h.shape[0]
    T = 1.0 / config.beta
    denses = _dense_stack(family, h)
    delta = _probe_delta(spec.n_trainable, config.grad_step)
    n_probe = delta.shape[1]
    h_cols = np.repeat(h.T, n_probe, axis=1)
    point_of_col = np.repeat(np.arange(m), n_probe)
    adam = adam_init(spec.n_trainable, config.lr)
    losses = np.empty(config.epochs)
    for epoch in range(config.epochs):
        t_cols = _point_major(theta[:, None], delta, m)
        G = _free_energy_columns(spec, t_cols, None, h_cols, denses, point_of_col, T)
        if not np.all(np.isfinite(G)):
            raise NonFiniteLoss(f"non-finite loss at epoch {epoch}")
        per_probe = G.reshape(m, n_probe).sum(axis=0)
        losses[epoch] = per_probe[0]
        grads = (per_probe[1::2] - per_probe[2::2]) / (2.0 * config.grad_step)
        adam, theta = adam_step(adam, theta, grads)
    final_G = _free_energy_columns(
        spec, theta, None, h.T.copy(), denses, np.arange(m), T
    )
    ck = Checkpoint(
        kind="meta", family=family, beta=config.beta, spec=spec,
        trainables=theta, seed=config.seed,
    )
    return TrainReport(
        loss_history=losses,
        per_h_free_energy=final_G,
        wall_time_s=time.perf_counter() - t0,
        checkpoint=ck,
    )


def train_nn_meta_vqt(config: NnTrainConfig) -> TrainReport:
    """Adam on the network weights; circuit-angle gradients by central differences,
    pulled back through the network analytically."""
    t0 = time.perf_counter()
    family = config.family
    spec = build_external_ansatz(family, config.l_su2, config.l_hva)
    sizes = (family.param_dim, *config.hidden, spec.n_external)
    net = init_mlp(sizes, stream(config.seed, "nn-init"))
    phi = net.to_vector()
    h = config.h_train
    m = h.shape[0]
    T = 1.0 / config.beta
    denses = _dense_stack(family, h)
    delta = _probe_delta(spec.n_external, config.grad_step)
    n_probe = delta.shape[1]
    h_cols = np.repeat(h.T, n_probe, axis=1)
    point_of_col = np.repeat(np.arange(m), n_probe)
    adam = adam_init(phi.size, config.lr)
    losses = np.empty(config.epochs)
    for epoch in range(config.epochs):
        angles, acts = net.forward_cached(h.T.copy())
        e_cols = _point_major(angles, delta, m)
        G = _free_energy_columns(spec, None, e_cols, h_cols, denses, point_of_col, T)
        if not np.all(np.isfinite(G)):
            raise NonFiniteLoss(f"non-finite loss at epoch {epoch}")
        G = G.reshape(m, n_probe)
        losses[epoch] = G[:, 0].sum()
        upstream = ((G[:, 1::2] - G[:, 2::2]) / (2.0 * config.grad_step)).T
        grads = net.backprop(acts, upstream)
        adam, phi = adam_step(adam, phi, grads)
        net = net.from_vector(phi)
    final_angles = net.forward(h.T.copy())
    final_G = _free_energy_columns(
        spec, None, final_angles, h.T.copy(), denses, np.arange(m), T
    )
    ck = Checkpoint(
        kind="nn-meta", family=family, beta=config.beta, spec=spec,
        net=net, seed=config.seed,
    )
    return TrainReport(
        loss_history=losses,
        per_h_free_energy=final_G,
        wall_time_s=time.perf_counter() - t0,
        checkpoint=ck,
    )


def train_vqt_single(
    family: HamiltonianFamily,
    h,
    beta: float,
    spec: AnsatzSpec,
    init,
    epochs: int,
    lr: float,
    grad_step: float = DEFAULT_GRAD_STEP,
) -> TrainReport:
    """Tune circuit angles at one fixed parameter point.

    init is either a trainable vector for the given spec, or a network whose
    output at h seeds the angles (the spec's external slots are then rebound
    as trainables).
    """
    t0 = time.perf_counter()
    h = np.atleast_1d(np.asarray(h, dtype=float))
    if h.shape != (family.param_dim,):
        raise ConfigInvalid(f"parameter point {h} does not match family")
    if epochs < 0 or lr <= 0 or beta <= 0 or grad_step <= 0:
        raise ConfigInvalid("bad epochs/lr/beta/grad_step")
    if isinstance(init, Mlp):
        theta = np.asarray(init.forward(h), dtype=float)
        spec = externals_to_trainables(spec)
    else:
        theta = np.asarray(init, dtype=float)
    if theta.shape != (spec.n_trainable,):
        raise ConfigInvalid(
            f"{theta.shape} initial angles for a spec wanting {spec.n_trainable}"
        )
    hs = family.build(h)
    denses = to_dense(hs)[None]
    T = 1.0 / beta
    delta = _probe_delta(spec.n_trainable, grad_step)
    n_probe = delta.shape[1]
    h_cols = np.repeat(h[:, None], n_probe, axis=1)
    zeros = np.zeros(n_probe, dtype=int)
    adam = adam_init(spec.n_trainable, lr)
    losses = np.empty(epochs)
    for epoch in range(epochs):
        t_cols = theta[:, None] + delta
        G = _free_energy_columns(spec, t_cols, None, h_cols, denses, zeros, T)
        if not np.all(np.isfinite(G)):
            raise NonFiniteLoss(f"non-finite loss at epoch {epoch}")
        losses[epoch] = G[0]
        grads = (G[1::2] - G[2::2]) / (2.0 * grad_step)
        adam, theta = adam_step(adam, theta, grads)
    final_G = _free_energy_columns(
        spec, theta, None, h[:, None], denses, np.zeros(1, dtype=int), T
    )
    states = simulate_batch(spec, theta, None, h[:, None])
    rho = reduced_states_batch(states, spec.n_system)[0]
    fid = linalg.fidelity(rho, exact_gibbs(hs, beta).gibbs_state)
    ck = Checkpoint(
        kind="meta", family=family, beta=beta, spec=spec, trainables=theta
    )
    return TrainReport(
        loss_history=losses,
        per_h_free_energy=final_G,
        wall_time_s=time.perf_counter() - t0,
        checkpoint=ck,
        final_fidelity=fid,
    )


@dataclass
class EvalTable:
    h: np.ndarray
    fidelity: np.ndarray
    trace_distance: np.ndarray
    g_var: np.ndarray
    g_exact: np.ndarray
    rel_error: np.ndarray  # nan where the denominator guard fired
    skipped: list[int] = field(default_factory=list)


def evaluate_on_grid(artifact: Checkpoint, family, h_test, beta: float) -> EvalTable:
    """Inference-only metrics of a trained preparer across a parameter grid."""
    h = _check_h_train(family, h_test)
    M = h.shape[0]
    trainables, externals = artifact.angle_stores(h.T.copy())
    states = simulate_batch(artifact.spec, trainables, externals, h.T.copy())
    rhos = reduced_states_batch(states, artifact.spec.n_system)
    fid = np.empty(M)
    td = np.empty(M)
    g_var = np.empty(M)
    g_exact = np.empty(M)
    rel = np.full(M, np.nan)
    skipped: list[int] = []
    T = 1.0 / beta
    for i in range(M):
        hs = family.build(h[i])
        point = exact_gibbs(hs, beta)
        fid[i] = linalg.fidelity(rhos[i], point.gibbs_state)
        td[i] = linalg.trace_distance(rhos[i], point.gibbs_state)
        g_var[i] = expectation(hs, rhos[i]) - T * linalg.von_neumann_entropy(rhos[i])
        g_exact[i] = point.free_energy
        if abs(point.free_energy) < 1e-9:
            skipped.append(i)
        else:
            rel[i] = abs(g_var[i] - g_exact[i]) / abs(g_exact[i])
    return EvalTable(
        h=h, fidelity=fid, trace_distance=td,
        g_var=g_var, g_exact=g_exact, rel_error=rel, skipped=skipped,
    )
