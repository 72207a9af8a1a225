"""Meta-learned variational preparation of quantum thermal states.

A statevector simulator with parameter-encoding ansatz circuits, trainers
that learn Gibbs-state preparation across whole Hamiltonian families, an
exact thermodynamic oracle for verification, and a quantum Boltzmann machine
built on the frozen preparer.
"""

from __future__ import annotations

from .circuits import (
    AnsatzSpec,
    EncodedLinear,
    External,
    GateOp,
    Trainable,
    apply_gate,
    build_external_ansatz,
    build_hva_layer,
    build_meta_ansatz,
    build_su2_encoding,
    build_su2_external,
    externals_to_trainables,
    reduced_state,
    reduced_states_batch,
    simulate,
    simulate_batch,
    spec_from_json,
    spec_to_json,
)
from .config import RunConfig, config_hash, materialize_grid, parse_config, serialize_config
from .errors import Error
from .hamiltonians import (
    HamiltonianFamily,
    PauliString,
    PauliSum,
    build_heisenberg_fields,
    build_kitaev_ring,
    build_qbm_hamiltonian,
    build_tfim,
    build_total_z,
    commutes,
    commuting_blocks,
    expectation,
    heisenberg_family,
    kitaev_family,
    pauli_sum,
    qbm_family,
    tfim_family,
    to_dense,
)
from .linalg import (
    fidelity,
    kl_divergence,
    partial_trace,
    trace_distance,
    von_neumann_entropy,
)
from .mlp import Mlp, init_mlp
from .optim import AdamState, adam_init, adam_step, grad_central_diff
from .oracle import (
    DEFAULT_T_GRID,
    ThermalPoint,
    crossover_temperature,
    exact_gibbs,
    free_energy_of_state,
    magnetization,
    phase_scan,
    susceptibility,
)
from .qbm import QbmConfig, QbmReport, qbm_loss, train_qbm, visible_distribution
from .records import ExperimentRecord, Table, emit_plotdata, load_record, save_record
from .runner import run
from .seeding import stream
from .trainers import (
    Checkpoint,
    EvalTable,
    MetaTrainConfig,
    NnTrainConfig,
    TrainReport,
    evaluate_on_grid,
    global_loss,
    load_checkpoint,
    save_checkpoint,
    train_meta_vqt,
    train_nn_meta_vqt,
    train_vqt_single,
)

__version__ = "0.1.0"
