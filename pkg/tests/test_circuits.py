from __future__ import annotations

import numpy as np
import pytest

from metatherm.circuits import (
    AnsatzSpec,
    EncodedLinear,
    External,
    GateOp,
    Trainable,
    apply_gate,
    build_external_ansatz,
    build_hva_layer,
    build_meta_ansatz,
    check_schema_version,
    externals_to_trainables,
    reduced_state,
    reduced_states_batch,
    simulate,
    simulate_batch,
    spec_from_json,
    spec_to_json,
)
from metatherm.errors import BadSplit, BadTarget, SlotMismatch
from metatherm.hamiltonians import (
    build_heisenberg_fields,
    build_kitaev_ring,
    build_tfim,
    heisenberg_family,
    kitaev_family,
    tfim_family,
)

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


def dense_word(letters: str) -> np.ndarray:
    m = np.eye(1, dtype=complex)
    for c in letters:
        m = np.kron(m, PAULI[c])
    return m


def rot_matrix(kind: str, theta: float) -> np.ndarray:
    sigma = {"rx": X, "ry": Y, "rz": Z}[kind]
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return c * np.eye(2) - 1j * s * sigma


def embed(u: np.ndarray, q: int, n: int) -> np.ndarray:
    m = np.eye(1, dtype=complex)
    for i in range(n):
        m = np.kron(m, u if i == q else I2)
    return m


# -------------------------------------------------------------- gate conventions

def test_ry_half_angle_convention():
    psi = apply_gate(np.array([1.0, 0.0]), GateOp("ry", (0,), angle=Trainable(0)), 0.7)
    assert np.allclose(psi, [np.cos(0.35), np.sin(0.35)], atol=1e-15)


def test_rz_is_exact_diagonal_phase():
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    psi = apply_gate(plus, GateOp("rz", (0,), angle=Trainable(0)), 1.1)
    want = np.array([np.exp(-0.55j), np.exp(0.55j)]) / np.sqrt(2)
    assert np.abs(psi - want).max() < 1e-15


@pytest.mark.parametrize("kind", ["rx", "ry", "rz"])
@pytest.mark.parametrize("q", [0, 1, 2])
def test_single_qubit_rotations_match_dense(kind, q, rng):
    theta = rng.uniform(-np.pi, np.pi)
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi /= np.linalg.norm(psi)
    got = apply_gate(psi, GateOp(kind, (q,), angle=Trainable(0)), theta)
    want = embed(rot_matrix(kind, theta), q, 3) @ psi
    assert np.abs(got - want).max() < 1e-12


def test_cnot_msb_control():
    # qubit 0 is the most significant bit: |10> flips to |11>, |01> stays
    g = GateOp("cnot", (0, 1))
    e = np.eye(4)
    assert np.allclose(apply_gate(e[2], g), e[3])
    assert np.allclose(apply_gate(e[3], g), e[2])
    assert np.allclose(apply_gate(e[1], g), e[1])
    assert np.allclose(apply_gate(e[0], g), e[0])


def test_pauli_rotation_has_no_half_angle():
    theta = 0.4
    g = GateOp("pauli", (0, 1), angle=Trainable(0), letters="XX")
    psi = apply_gate(np.eye(4)[0], g, theta)
    want = np.array([np.cos(theta), 0, 0, -1j * np.sin(theta)])
    assert np.abs(psi - want).max() < 1e-15


@pytest.mark.parametrize("letters", ["XY", "YZ", "ZY", "YY", "XZ", "IY"])
def test_pauli_rotation_matches_dense(letters, rng):
    theta = rng.uniform(-np.pi, np.pi)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi /= np.linalg.norm(psi)
    g = GateOp("pauli", tuple(i for i, c in enumerate(letters) if c != "I"),
               angle=Trainable(0), letters=letters)
    got = apply_gate(psi, g, theta)
    P = dense_word(letters)
    want = (np.cos(theta) * np.eye(4) - 1j * np.sin(theta) * P) @ psi
    assert np.abs(got - want).max() < 1e-12


def test_bell_state_from_ry_and_cnot():
    spec = AnsatzSpec(
        n_system=1, n_ancilla=1, param_dim=0,
        gates=(GateOp("ry", (0,), angle=Trainable(0)), GateOp("cnot", (0, 1))),
        n_trainable=1, n_external=0,
    )
    psi = simulate(spec, np.array([np.pi / 2]), None, None)
    want = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.abs(psi - want).max() < 1e-12


def test_gateop_validation():
    with pytest.raises(BadTarget):
        GateOp("cnot", (1, 1))
    with pytest.raises(BadTarget):
        GateOp("cnot", (0,))
    with pytest.raises(BadTarget):
        GateOp("ry", (0, 1), angle=Trainable(0))
    with pytest.raises(BadTarget):
        GateOp("ry", (0,))
    with pytest.raises(BadTarget):
        GateOp("pauli", (0,), angle=Trainable(0))
    with pytest.raises(BadTarget):
        GateOp("toffoli", (0, 1, 2))


# ------------------------------------------------------------------ ansatz shapes

def test_meta_ansatz_tfim2_sizes():
    spec = build_meta_ansatz(tfim_family(2, 1.0), 2, 2)
    assert spec.n_system == 2 and spec.n_ancilla == 2
    assert spec.n_trainable == 46
    assert spec.n_external == 0
    spec.validate()


def test_external_ansatz_heisenberg_sizes():
    spec = build_external_ansatz(heisenberg_family(), 4, 0)
    assert spec.n_external == 32
    assert spec.n_trainable == 0


def test_encoding_slots_scale_with_param_dim():
    spec = build_meta_ansatz(heisenberg_family(), 2, 0)
    # 2 angles per qubit per layer, each with one weight and one bias per
    # Hamiltonian parameter (param_dim 2)
    assert spec.n_trainable == 2 * 4 * 2 * (2 * 2)


def hva_rotation_count(pattern, n_tot):
    return sum(1 for g in build_hva_layer(pattern, n_tot) if g.kind == "pauli")


def test_hva_tiling_counts_frozen():
    assert hva_rotation_count(build_tfim(2, 1.0, 1.0), 4) == 7
    assert hva_rotation_count(build_kitaev_ring(3, 1.0, 1.0), 6) == 13
    assert hva_rotation_count(build_heisenberg_fields(1.0, 1.0), 4) == 21


def test_hva_wide_word_offsets():
    # width-3 word on 6 wires lands at offsets 0 and 3; on 5 wires only at 0
    pattern = build_kitaev_ring(3, 1.0, 1.0)
    words6 = [g.letters for g in build_hva_layer(pattern, 6) if g.kind == "pauli"]
    assert "YZYIII" in words6 and "IIIYZY" in words6
    words5 = [g.letters for g in build_hva_layer(pattern, 5) if g.kind == "pauli"]
    assert sum(1 for w in words5 if "Y" in w) == 1


def test_kitaev_meta_ansatz_sizes():
    fam = kitaev_family(3, 1.0)
    spec = build_meta_ansatz(fam, 4, 1)
    n_tot = 2 * fam.n_qubits
    su2 = 2 * n_tot * 4 * 2
    hva = hva_rotation_count(fam.build(np.ones(1)), n_tot)
    assert spec.n_trainable == su2 + hva


def test_validate_rejects_slot_gaps():
    spec = AnsatzSpec(
        n_system=1, n_ancilla=1, param_dim=0,
        gates=(GateOp("ry", (0,), angle=Trainable(1)),),
        n_trainable=1, n_external=0,
    )
    with pytest.raises(SlotMismatch):
        spec.validate()


def test_validate_rejects_out_of_range_target():
    spec = AnsatzSpec(
        n_system=1, n_ancilla=1, param_dim=0,
        gates=(GateOp("ry", (5,), angle=Trainable(0)),),
        n_trainable=1, n_external=0,
    )
    with pytest.raises(BadTarget):
        spec.validate()


def test_validate_rejects_short_pauli_letters():
    spec = AnsatzSpec(
        n_system=1, n_ancilla=1, param_dim=0,
        gates=(GateOp("pauli", (0,), angle=Trainable(0), letters="X"),),
        n_trainable=1, n_external=0,
    )
    with pytest.raises(BadTarget):
        spec.validate()


# -------------------------------------------------------------------- simulation

def test_norm_preserved_through_deep_circuit(rng):
    spec = build_meta_ansatz(tfim_family(2, 1.0), 2, 2)
    theta = rng.uniform(-np.pi, np.pi, spec.n_trainable)
    psi = simulate(spec, theta, None, np.array([0.7]))
    assert abs(np.linalg.norm(psi) - 1.0) < 1e-12


def test_batch_equals_serial_bitwise(rng):
    spec = build_meta_ansatz(tfim_family(2, 1.0), 2, 1)
    B = 5
    thetas = rng.uniform(-np.pi, np.pi, (spec.n_trainable, B))
    hs = rng.uniform(-2, 2, (1, B))
    batch = simulate_batch(spec, thetas, None, hs)
    for b in range(B):
        single = simulate(spec, thetas[:, b], None, hs[:, b])
        assert np.array_equal(batch[:, b], single)


def test_shared_trainables_broadcast_over_h_columns(rng):
    spec = build_meta_ansatz(tfim_family(2, 1.0), 1, 1)
    theta = rng.uniform(-np.pi, np.pi, spec.n_trainable)
    hs = np.array([[0.3, 1.4]])
    batch = simulate_batch(spec, theta, None, hs)
    for b in range(2):
        assert np.array_equal(batch[:, b], simulate(spec, theta, None, hs[:, b]))


def test_encoded_linear_resolution():
    # theta = w * h + b, checked against the same circuit with a literal angle
    spec = AnsatzSpec(
        n_system=1, n_ancilla=1, param_dim=1,
        gates=(GateOp("ry", (0,), angle=EncodedLinear((0,), (1,))),),
        n_trainable=2, n_external=0,
    )
    w, b, h = 0.6, -0.2, 1.7
    got = simulate(spec, np.array([w, b]), None, np.array([h]))
    ref = AnsatzSpec(
        n_system=1, n_ancilla=1, param_dim=0,
        gates=(GateOp("ry", (0,), angle=Trainable(0)),),
        n_trainable=1, n_external=0,
    )
    want = simulate(ref, np.array([w * h + b]), None, None)
    assert np.array_equal(got, want)


def test_external_angles_drive_circuit(rng):
    spec = build_external_ansatz(heisenberg_family(), 1, 0)
    angles = rng.uniform(-np.pi, np.pi, spec.n_external)
    psi = simulate(spec, None, angles, np.array([0.5, 0.5]))
    assert abs(np.linalg.norm(psi) - 1.0) < 1e-12


def test_missing_externals_raises():
    spec = build_external_ansatz(heisenberg_family(), 1, 0)
    with pytest.raises(SlotMismatch):
        simulate(spec, None, None, np.array([0.5, 0.5]))


def test_wrong_trainable_length_raises(rng):
    spec = build_meta_ansatz(tfim_family(2, 1.0), 1, 0)
    with pytest.raises(SlotMismatch):
        simulate(spec, rng.uniform(size=3), None, np.array([0.5]))


def test_externals_to_trainables_same_state(rng):
    ext = build_external_ansatz(heisenberg_family(), 2, 0)
    res = externals_to_trainables(ext)
    assert res.n_trainable == ext.n_external and res.n_external == 0
    angles = rng.uniform(-np.pi, np.pi, ext.n_external)
    h = np.array([0.4, -1.1])
    assert np.array_equal(
        simulate(ext, None, angles, h), simulate(res, angles, None, h)
    )


def test_externals_to_trainables_rejects_mixed_spec():
    spec = build_meta_ansatz(tfim_family(2, 1.0), 1, 0)
    with pytest.raises(SlotMismatch):
        externals_to_trainables(spec)


# ---------------------------------------------------------------- reduced states

def test_reduced_state_bell_is_maximally_mixed():
    psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    rho = reduced_state(psi, 1)
    assert np.abs(rho - np.eye(2) / 2).max() < 1e-12


def test_reduced_state_product_keeps_system_factor(rng):
    a = rng.normal(size=4) + 1j * rng.normal(size=4)
    a /= np.linalg.norm(a)
    b = rng.normal(size=2) + 1j * rng.normal(size=2)
    b /= np.linalg.norm(b)
    rho = reduced_state(np.kron(a, b), 2)
    assert np.abs(rho - np.outer(a, a.conj())).max() < 1e-12


def test_reduced_states_batch_matches_loop(rng):
    states = rng.normal(size=(16, 6)) + 1j * rng.normal(size=(16, 6))
    states /= np.linalg.norm(states, axis=0)
    rhos = reduced_states_batch(states, 2)
    assert rhos.shape == (6, 4, 4)
    for b in range(6):
        assert np.abs(rhos[b] - reduced_state(states[:, b], 2)).max() < 1e-12


def test_reduced_state_split_validation():
    psi = np.zeros(4)
    psi[0] = 1.0
    with pytest.raises(BadSplit):
        reduced_state(psi, 2)
    with pytest.raises(BadSplit):
        reduced_state(psi, 0)
    with pytest.raises(BadSplit):
        reduced_states_batch(psi.reshape(4, 1), 2)


# --------------------------------------------------------------- serialization

def test_spec_json_round_trip():
    for spec in (
        build_meta_ansatz(tfim_family(2, 1.0), 2, 2),
        build_external_ansatz(heisenberg_family(), 4, 1),
        build_meta_ansatz(kitaev_family(3, 1.0), 1, 1),
    ):
        back = spec_from_json(spec_to_json(spec))
        assert back == spec


def test_schema_version_gate():
    check_schema_version("1.0.0")
    check_schema_version("1.9.3")
    with pytest.raises(SlotMismatch):
        check_schema_version("2.0.0")
    with pytest.raises(SlotMismatch):
        check_schema_version("0.1")


def test_spec_json_detects_corruption():
    import json

    d = json.loads(spec_to_json(build_meta_ansatz(tfim_family(2, 1.0), 1, 1)))
    d["n_trainable"] += 1
    with pytest.raises(SlotMismatch):
        spec_from_json(json.dumps(d))
