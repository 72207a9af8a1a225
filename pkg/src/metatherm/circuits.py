"""Ansatz construction and statevector simulation.

Gate programs are symbolic: every rotation angle names its source, either a
trainable slot, a linear combination of Hamiltonian parameters with trainable
weights and biases, or an externally supplied slot (network-computed angles).
The simulator is batched: a batch of parameter columns evolves as one
[dim, batch] array, and a single simulation is just batch width 1, so batched
and serial evaluation agree bitwise.

Conventions: qubit 0 is the most significant bit; RY(t) = exp(-i t Y / 2),
RZ(t) = exp(-i t Z / 2), RX(t) = exp(-i t X / 2), and a Pauli-string rotation
is exp(-i t P).  The system register occupies the low qubit indices, ancillas
the high ones.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import BadSplit, BadTarget, SlotMismatch
from .hamiltonians import PauliSum, string_action

SCHEMA_VERSION = "1.0.0"

ROTATIONS = ("rx", "ry", "rz")


@dataclass(frozen=True)
class Trainable:
    slot: int


@dataclass(frozen=True)
class EncodedLinear:
    """Angle = sum_k (w_k * h_k + b_k) with all weights and biases trainable."""

    weight_slots: tuple[int, ...]
    bias_slots: tuple[int, ...]


@dataclass(frozen=True)
class External:
    slot: int


AngleSource = Trainable | EncodedLinear | External


@dataclass(frozen=True)
class GateOp:
    kind: str
    targets: tuple[int, ...]
    angle: AngleSource | None = None
    letters: str | None = None

    def __post_init__(self):
        if self.kind == "cnot":
            if len(self.targets) != 2 or self.targets[0] == self.targets[1]:
                raise BadTarget(f"cnot needs 2 distinct targets, got {self.targets}")
            if self.angle is not None:
                raise BadTarget("cnot takes no angle")
        elif self.kind in ROTATIONS:
            if len(self.targets) != 1:
                raise BadTarget(f"{self.kind} needs 1 target, got {self.targets}")
            if self.angle is None:
                raise BadTarget(f"{self.kind} needs an angle source")
        elif self.kind == "pauli":
            if not self.letters:
                raise BadTarget("pauli rotation needs letters")
            if self.angle is None:
                raise BadTarget("pauli rotation needs an angle source")
        else:
            raise BadTarget(f"unknown gate kind {self.kind!r}")


@dataclass(frozen=True)
class AnsatzSpec:
    n_system: int
    n_ancilla: int
    param_dim: int
    gates: tuple[GateOp, ...]
    n_trainable: int
    n_external: int

    @property
    def n_tot(self) -> int:
        return self.n_system + self.n_ancilla

    def validate(self) -> None:
        seen_t = set()
        seen_e = set()
        for g in self.gates:
            for q in g.targets:
                if not 0 <= q < self.n_tot:
                    raise BadTarget(f"target {q} out of range for {self.n_tot} qubits")
            if g.kind == "pauli" and len(g.letters) != self.n_tot:
                raise BadTarget(
                    f"pauli letters {g.letters!r} must span all {self.n_tot} qubits"
                )
            a = g.angle
            if isinstance(a, Trainable):
                seen_t.add(a.slot)
            elif isinstance(a, External):
                seen_e.add(a.slot)
            elif isinstance(a, EncodedLinear):
                if len(a.weight_slots) != self.param_dim or len(a.bias_slots) != self.param_dim:
                    raise SlotMismatch(
                        "encoded angle needs one weight and one bias per parameter"
                    )
                seen_t.update(a.weight_slots)
                seen_t.update(a.bias_slots)
        if seen_t != set(range(self.n_trainable)):
            raise SlotMismatch(
                f"trainable slots {sorted(seen_t)} do not cover 0..{self.n_trainable - 1}"
            )
        if seen_e != set(range(self.n_external)):
            raise SlotMismatch(
                f"external slots {sorted(seen_e)} do not cover 0..{self.n_external - 1}"
            )


class _SlotAlloc:
    """Hands out consecutive trainable/external slot indices during building."""

    def __init__(self):
        self.n_trainable = 0
        self.n_external = 0

    def trainable(self) -> int:
        s = self.n_trainable
        self.n_trainable += 1
        return s

    def external(self) -> int:
        s = self.n_external
        self.n_external += 1
        return s


def _cnot_chain(n_tot: int) -> list[GateOp]:
    return [GateOp("cnot", (i, i + 1)) for i in range(n_tot - 1)]


def _su2_layers(n_tot, layers, make_angle) -> list[GateOp]:
    gates: list[GateOp] = []
    for _ in range(layers):
        for q in range(n_tot):
            gates.append(GateOp("rz", (q,), angle=make_angle()))
            gates.append(GateOp("ry", (q,), angle=make_angle()))
        gates.extend(_cnot_chain(n_tot))
    return gates


def build_su2_encoding(
    n_tot: int, layers: int, param_dim: int, alloc: _SlotAlloc | None = None
) -> list[GateOp]:
    """Hardware-efficient encoding layers: per qubit RZ then RY, each angle a
    trainable linear map of the Hamiltonian parameters, then a CNOT chain.

    Allocates 4 * n_tot * layers * param_dim trainable slots.
    """
    if layers < 1:
        raise ValueError("need at least one layer")
    alloc = alloc or _SlotAlloc()

    def encoded():
        w = tuple(alloc.trainable() for _ in range(param_dim))
        b = tuple(alloc.trainable() for _ in range(param_dim))
        return EncodedLinear(w, b)

    return _su2_layers(n_tot, layers, encoded)


def build_su2_external(n_tot: int, layers: int, alloc: _SlotAlloc | None = None) -> list[GateOp]:
    """Same layout as the encoding layers, but angles come from external slots."""
    alloc = alloc or _SlotAlloc()
    return _su2_layers(n_tot, layers, lambda: External(alloc.external()))


def _tile_words(pattern: PauliSum, n_tot: int) -> list[str]:
    """Distinct local words of the pattern, instanced across the full register.

    A word is a term's letters stripped to its support span.  Width-1 words go
    on every wire, width-2 words on every adjacent pair, wider words (string
    terms) at offsets 0 and width when both fit.
    """
    words: list[str] = []
    for t in pattern.terms:
        support = [i for i, c in enumerate(t.letters) if c != "I"]
        if not support:
            continue
        word = t.letters[support[0] : support[-1] + 1]
        if word not in words:
            words.append(word)
    placed: list[str] = []
    for word in words:
        w = len(word)
        if w == 1:
            offsets = range(n_tot)
        elif w == 2:
            offsets = range(n_tot - 1)
        else:
            offsets = [0, w] if 2 * w <= n_tot else [0]
        for off in offsets:
            placed.append("I" * off + word + "I" * (n_tot - off - w))
    return placed


def build_hva_layer(
    pattern: PauliSum,
    n_tot: int,
    alloc: _SlotAlloc | None = None,
    external: bool = False,
) -> list[GateOp]:
    """One Pauli rotation per tiled Hamiltonian term, then a CNOT chain."""
    alloc = alloc or _SlotAlloc()
    gates: list[GateOp] = []
    for letters in _tile_words(pattern, n_tot):
        targets = tuple(i for i, c in enumerate(letters) if c != "I")
        angle = External(alloc.external()) if external else Trainable(alloc.trainable())
        gates.append(GateOp("pauli", targets, angle=angle, letters=letters))
    gates.extend(_cnot_chain(n_tot))
    return gates


def build_meta_ansatz(family, l_enc: int, l_hva: int) -> AnsatzSpec:
    """Encoding layers followed by HVA layers, all angles trainable resident."""
    n_system = family.n_qubits
    n_tot = 2 * n_system
    alloc = _SlotAlloc()
    gates = build_su2_encoding(n_tot, l_enc, family.param_dim, alloc)
    pattern = family.build(np.ones(family.param_dim))
    for _ in range(l_hva):
        gates.extend(build_hva_layer(pattern, n_tot, alloc))
    spec = AnsatzSpec(
        n_system=n_system,
        n_ancilla=n_system,
        param_dim=family.param_dim,
        gates=tuple(gates),
        n_trainable=alloc.n_trainable,
        n_external=alloc.n_external,
    )
    spec.validate()
    return spec


def build_external_ansatz(family, l_su2: int, l_hva: int) -> AnsatzSpec:
    """Same circuit shape with every angle supplied externally (network-driven)."""
    n_system = family.n_qubits
    n_tot = 2 * n_system
    alloc = _SlotAlloc()
    gates = build_su2_external(n_tot, l_su2, alloc)
    pattern = family.build(np.ones(family.param_dim))
    for _ in range(l_hva):
        gates.extend(build_hva_layer(pattern, n_tot, alloc, external=True))
    spec = AnsatzSpec(
        n_system=n_system,
        n_ancilla=n_system,
        param_dim=family.param_dim,
        gates=tuple(gates),
        n_trainable=alloc.n_trainable,
        n_external=alloc.n_external,
    )
    spec.validate()
    return spec


def externals_to_trainables(spec: AnsatzSpec) -> AnsatzSpec:
    """Rebind every external slot as a trainable slot (for warm-start tuning)."""
    gates = tuple(
        GateOp(g.kind, g.targets, angle=Trainable(g.angle.slot), letters=g.letters)
        if isinstance(g.angle, External)
        else g
        for g in spec.gates
    )
    if spec.n_trainable:
        raise SlotMismatch("spec already has trainable slots")
    out = AnsatzSpec(
        n_system=spec.n_system,
        n_ancilla=spec.n_ancilla,
        param_dim=spec.param_dim,
        gates=gates,
        n_trainable=spec.n_external,
        n_external=0,
    )
    out.validate()
    return out


def _as_columns(arr, n_rows: int, B: int, what: str) -> np.ndarray:
    if arr is None:
        if n_rows:
            raise SlotMismatch(f"spec wants {n_rows} {what}, got none")
        a = np.zeros(0)
    else:
        a = np.asarray(arr, dtype=float)
    if a.ndim == 1:
        if a.shape[0] != n_rows:
            raise SlotMismatch(f"{what} length {a.shape[0]}, spec wants {n_rows}")
        return np.broadcast_to(a[:, None], (n_rows, B))
    if a.shape != (n_rows, B):
        raise SlotMismatch(f"{what} shape {a.shape}, expected ({n_rows}, {B})")
    return a


def _apply_rotation(state: np.ndarray, n: int, kind: str, q: int, theta: np.ndarray) -> None:
    pre = 1 << q
    post = state.shape[0] >> (q + 1)
    s = state.reshape(pre, 2, post, state.shape[1])
    half = 0.5 * theta
    if kind == "rz":
        phase = np.exp(-1j * half)
        s[:, 0] *= phase
        s[:, 1] *= np.conj(phase)
        return
    c = np.cos(half)
    a = s[:, 0].copy()
    b = s[:, 1]
    if kind == "ry":
        sn = np.sin(half)
        s[:, 0] = c * a - sn * b
        s[:, 1] = sn * a + c * b
    else:  # rx
        isn = -1j * np.sin(half)
        s[:, 0] = c * a + isn * b
        s[:, 1] = isn * a + c * b


def _apply_cnot(state: np.ndarray, n: int, control: int, target: int) -> None:
    v = state.reshape([2] * n + [state.shape[1]])
    ix0 = [slice(None)] * (n + 1)
    ix1 = [slice(None)] * (n + 1)
    ix0[control] = ix1[control] = 1
    ix0[target] = 0
    ix1[target] = 1
    tmp = v[tuple(ix0)].copy()
    v[tuple(ix0)] = v[tuple(ix1)]
    v[tuple(ix1)] = tmp


def _apply_pauli_rotation(state: np.ndarray, letters: str, theta: np.ndarray) -> None:
    mask, phase = string_action(letters)
    flipped = phase[:, None] * state[np.arange(state.shape[0]) ^ mask]
    state *= np.cos(theta)
    state -= 1j * np.sin(theta) * flipped


def _resolve_angle(angle: AngleSource, trainables, externals, hs) -> np.ndarray:
    if isinstance(angle, Trainable):
        return trainables[angle.slot]
    if isinstance(angle, External):
        return externals[angle.slot]
    theta = np.zeros(hs.shape[1])
    for k, (ws, bs) in enumerate(zip(angle.weight_slots, angle.bias_slots)):
        theta = theta + trainables[ws] * hs[k] + trainables[bs]
    return theta


def simulate_batch(spec: AnsatzSpec, trainables, externals, hs) -> np.ndarray:
    """Evolve |0...0> through the spec for a batch of parameter columns.

    trainables [n_trainable(, B)], externals [n_external(, B)] and
    hs [param_dim(, B)] broadcast along the batch; returns [2**n_tot, B].
    """
    B = 1
    for arr in (trainables, externals, hs):
        if arr is not None and np.ndim(arr) == 2:
            B = max(B, np.shape(arr)[1])
    t = _as_columns(trainables, spec.n_trainable, B, "trainables")
    e = _as_columns(externals, spec.n_external, B, "externals")
    h = _as_columns(hs, spec.param_dim, B, "parameters")
    n = spec.n_tot
    state = np.zeros((1 << n, B), dtype=complex)
    state[0] = 1.0
    for g in spec.gates:
        if g.kind == "cnot":
            _apply_cnot(state, n, g.targets[0], g.targets[1])
        elif g.kind == "pauli":
            _apply_pauli_rotation(state, g.letters, _resolve_angle(g.angle, t, e, h))
        else:
            _apply_rotation(state, n, g.kind, g.targets[0], _resolve_angle(g.angle, t, e, h))
    return state


def simulate(spec: AnsatzSpec, trainables, externals, hs) -> np.ndarray:
    """Single-column simulation; returns the statevector of length 2**n_tot."""
    return simulate_batch(spec, trainables, externals, hs)[:, 0]


def apply_gate(state: np.ndarray, gate: GateOp, angle: float | None = None) -> np.ndarray:
    """Apply one gate to a plain statevector with an already-resolved angle."""
    dim = state.shape[0]
    n = dim.bit_length() - 1
    for q in gate.targets:
        if not 0 <= q < n:
            raise BadTarget(f"target {q} out of range for {n} qubits")
    out = state.astype(complex).reshape(dim, 1).copy()
    if gate.kind == "cnot":
        _apply_cnot(out, n, gate.targets[0], gate.targets[1])
    elif gate.kind == "pauli":
        if len(gate.letters) != n:
            raise BadTarget("pauli letters must span the register")
        _apply_pauli_rotation(out, gate.letters, np.asarray([angle], dtype=float))
    elif gate.kind in ROTATIONS:
        _apply_rotation(out, n, gate.kind, gate.targets[0], np.asarray([angle], dtype=float))
    else:
        raise BadTarget(f"unknown gate kind {gate.kind!r}")
    return out[:, 0]


def reduced_state(psi: np.ndarray, n_system: int) -> np.ndarray:
    """Trace out the ancilla register (high qubit indices) of a pure state."""
    dim = psi.shape[0]
    n = dim.bit_length() - 1
    if not 0 < n_system < n:
        raise BadSplit(f"cannot keep {n_system} of {n} qubits")
    a = psi.reshape(1 << n_system, -1)
    return a @ a.conj().T


def reduced_states_batch(states: np.ndarray, n_system: int) -> np.ndarray:
    """Batch version of reduced_state: [dim, B] -> [B, ds, ds]."""
    dim, B = states.shape
    n = dim.bit_length() - 1
    if not 0 < n_system < n:
        raise BadSplit(f"cannot keep {n_system} of {n} qubits")
    ds = 1 << n_system
    r = states.reshape(ds, dim // ds, B)
    return np.einsum("sab,tab->bst", r, r.conj(), optimize=True)


def _angle_to_json(a: AngleSource) -> dict:
    if isinstance(a, Trainable):
        return {"type": "trainable", "slot": a.slot}
    if isinstance(a, External):
        return {"type": "external", "slot": a.slot}
    return {
        "type": "encoded",
        "weights": list(a.weight_slots),
        "biases": list(a.bias_slots),
    }


def _angle_from_json(d: dict) -> AngleSource:
    if d["type"] == "trainable":
        return Trainable(int(d["slot"]))
    if d["type"] == "external":
        return External(int(d["slot"]))
    if d["type"] == "encoded":
        return EncodedLinear(
            tuple(int(x) for x in d["weights"]), tuple(int(x) for x in d["biases"])
        )
    raise SlotMismatch(f"unknown angle source {d['type']!r}")


def spec_to_dict(spec: AnsatzSpec) -> dict:
    gates = []
    for g in spec.gates:
        entry: dict = {"kind": g.kind, "targets": list(g.targets)}
        if g.letters is not None:
            entry["letters"] = g.letters
        if g.angle is not None:
            entry["angle"] = _angle_to_json(g.angle)
        gates.append(entry)
    return {
        "schema_version": SCHEMA_VERSION,
        "n_system": spec.n_system,
        "n_ancilla": spec.n_ancilla,
        "param_dim": spec.param_dim,
        "n_trainable": spec.n_trainable,
        "n_external": spec.n_external,
        "gates": gates,
    }


def check_schema_version(version: str) -> None:
    """Reject documents from a different major version."""
    major = str(version).split(".")[0]
    if major != SCHEMA_VERSION.split(".")[0]:
        raise SlotMismatch(f"unsupported schema version {version!r}")


def spec_from_dict(d: dict) -> AnsatzSpec:
    check_schema_version(d.get("schema_version", "0"))
    gates = tuple(
        GateOp(
            kind=g["kind"],
            targets=tuple(int(q) for q in g["targets"]),
            angle=_angle_from_json(g["angle"]) if "angle" in g else None,
            letters=g.get("letters"),
        )
        for g in d["gates"]
    )
    spec = AnsatzSpec(
        n_system=int(d["n_system"]),
        n_ancilla=int(d["n_ancilla"]),
        param_dim=int(d["param_dim"]),
        gates=gates,
        n_trainable=int(d["n_trainable"]),
        n_external=int(d["n_external"]),
    )
    spec.validate()
    return spec


def spec_to_json(spec: AnsatzSpec) -> str:
    return json.dumps(spec_to_dict(spec), sort_keys=True)


def spec_from_json(text: str) -> AnsatzSpec:
    return spec_from_dict(json.loads(text))
