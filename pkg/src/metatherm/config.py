"""Experiment configuration.

A run is described by a flat key-value document (one `key = value` per line,
dotted namespaces, `#` comments) plus command-line overrides.  Parsing is
strict: unknown keys, keys foreign to the command, type errors, and range
errors are all collected and reported together.  A validated config
serializes canonically, and the hash of that text identifies the run.
"""

from __future__ import annotations

import hashlib
import os
import re
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, ValidationError
from .hamiltonians import (
    HamiltonianFamily,
    heisenberg_family,
    kitaev_family,
    tfim_family,
)
from .seeding import stream

COMMANDS = (
    "train-meta",
    "train-nn-meta",
    "eval",
    "warmstart-vqt",
    "qbm",
    "phase-scan",
    "oracle",
)

FAMILY_KINDS = ("tfim", "kitaev", "heisenberg")

DEFAULT_OUT_ENV = "METATHERM_OUT"


# ---------------------------------------------------------------- grid specs

@dataclass(frozen=True)
class AxisSpec:
    kind: str  # uniform | random | list
    lo: float = 0.0
    hi: float = 0.0
    count: int = 0
    values: tuple[float, ...] = ()

    def points(self, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "uniform":
            return np.linspace(self.lo, self.hi, self.count)
        if self.kind == "random":
            return rng.uniform(self.lo, self.hi, self.count)
        return np.asarray(self.values, dtype=float)


_AXIS_RE = re.compile(r"(uniform|random|list)\((.*)\)\Z")


def _parse_axis(text: str) -> AxisSpec:
    m = _AXIS_RE.fullmatch(text.strip())
    if m is None:
        raise ParseError(f"bad grid axis {text!r}: want uniform(a,b,n), random(a,b,n) or list(v,...)")
    kind, body = m.group(1), m.group(2)
    args = [a.strip() for a in body.split(",")] if body.strip() else []
    if kind == "list":
        if not args:
            raise ParseError(f"bad grid axis {text!r}: empty list")
        try:
            return AxisSpec(kind="list", values=tuple(float(a) for a in args))
        except ValueError:
            raise ParseError(f"bad grid axis {text!r}: non-numeric entry") from None
    if len(args) != 3:
        raise ParseError(f"bad grid axis {text!r}: want three arguments")
    try:
        lo, hi, count = float(args[0]), float(args[1]), int(args[2])
    except ValueError:
        raise ParseError(f"bad grid axis {text!r}: non-numeric argument") from None
    if count < 1:
        raise ParseError(f"bad grid axis {text!r}: need at least one point")
    if kind == "random" and not lo < hi:
        raise ParseError(f"bad grid axis {text!r}: empty interval")
    return AxisSpec(kind=kind, lo=lo, hi=hi, count=count)


def parse_gridspec(text: str) -> tuple[AxisSpec, ...]:
    """One axis spec, or several joined by ' x ' for a cartesian product."""
    parts = re.split(r"\s+x\s+", text.strip())
    return tuple(_parse_axis(p) for p in parts)


def materialize_grid(text: str, param_dim: int, seed: int, label: str) -> np.ndarray:
    """Points [m, param_dim] for a grid spec; random axes draw from the run seed."""
    axes = parse_gridspec(text)
    if len(axes) != param_dim:
        raise ValidationError(
            [f"grid {text!r} has {len(axes)} axes, the model takes {param_dim} parameters"]
        )
    rng = stream(seed, "grid", label)
    arrays = [ax.points(rng) for ax in axes]
    if param_dim == 1:
        return arrays[0][:, None]
    mesh = np.meshgrid(*arrays, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=-1)


# ------------------------------------------------------------------- values

def _p_int(text: str) -> int:
    return int(text, 10)


def _p_float(text: str) -> float:
    return float(text)


def _p_str(text: str) -> str:
    return text


def _p_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(a.strip(), 10) for a in text.split(","))


def _p_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(a.strip()) for a in text.split(","))


def _p_grid(text: str) -> str:
    parse_gridspec(text)  # syntax check; the raw text is the stored form
    return text.strip()


def _fmt(value) -> str:
    if isinstance(value, tuple):
        return ", ".join(repr(v) for v in value)
    if isinstance(value, bool):
        raise TypeError("no boolean keys")
    return str(value) if isinstance(value, str) else repr(value)


# key -> (RunConfig attribute, value parser)
KEYS = {
    "command": ("command", _p_str),
    "family.kind": ("family_kind", _p_str),
    "family.n": ("family_n", _p_int),
    "family.j": ("family_j", _p_float),
    "beta": ("beta", _p_float),
    "seed": ("seed", _p_int),
    "epochs": ("epochs", _p_int),
    "lr": ("lr", _p_float),
    "grad_step": ("grad_step", _p_float),
    "layers.enc": ("l_enc", _p_int),
    "layers.hva": ("l_hva", _p_int),
    "layers.su2": ("l_su2", _p_int),
    "mlp.hidden": ("hidden", _p_int_list),
    "grid.train": ("grid_train", _p_grid),
    "grid.test": ("grid_test", _p_grid),
    "grid.h": ("grid_h", _p_grid),
    "grid.t": ("grid_t", _p_grid),
    "scan.dh": ("scan_dh", _p_float),
    "checkpoint": ("checkpoint", _p_str),
    "warm.h": ("warm_h", _p_grid),
    "warm.epochs": ("warm_epochs", _p_int),
    "warm.lr": ("warm_lr", _p_float),
    "warm.seeds": ("warm_seeds", _p_int),
    "qbm.target": ("qbm_target", _p_float_list),
    "out": ("out", _p_str),
}

_ATTR_TO_KEY = {attr: key for key, (attr, _) in KEYS.items()}

# canonical serialization order
KEY_ORDER = (
    "command",
    "family.kind",
    "family.n",
    "family.j",
    "beta",
    "seed",
    "epochs",
    "lr",
    "grad_step",
    "layers.enc",
    "layers.hva",
    "layers.su2",
    "mlp.hidden",
    "grid.train",
    "grid.test",
    "grid.h",
    "grid.t",
    "scan.dh",
    "checkpoint",
    "warm.h",
    "warm.epochs",
    "warm.lr",
    "warm.seeds",
    "qbm.target",
    "out",
)

# command -> (required keys, optional keys, defaults filled when absent)
_FAMILY = ("family.kind", "family.n", "family.j")
COMMAND_KEYS = {
    "train-meta": (
        ("family.kind", "grid.train"),
        _FAMILY + ("beta", "seed", "epochs", "lr", "grad_step",
                   "layers.enc", "layers.hva", "grid.test", "out"),
        {"family.j": 1.0, "beta": 1.0, "seed": 0, "epochs": 500, "lr": 0.01,
         "grad_step": 1e-4, "layers.enc": 2, "layers.hva": 2},
    ),
    "train-nn-meta": (
        ("family.kind", "grid.train"),
        _FAMILY + ("beta", "seed", "epochs", "lr", "grad_step",
                   "layers.su2", "layers.hva", "mlp.hidden", "grid.test", "out"),
        {"family.j": 1.0, "beta": 1.0, "seed": 0, "epochs": 500, "lr": 0.001,
         "grad_step": 1e-4, "layers.su2": 4, "layers.hva": 0,
         "mlp.hidden": (16, 16, 16)},
    ),
    "eval": (
        ("checkpoint", "grid.test"),
        ("beta", "seed", "out"),
        {"seed": 0},
    ),
    "warmstart-vqt": (
        ("checkpoint", "warm.h"),
        ("warm.epochs", "warm.lr", "warm.seeds", "grad_step", "seed", "out"),
        {"warm.epochs": 100, "warm.lr": 0.01, "warm.seeds": 1,
         "grad_step": 1e-4, "seed": 0},
    ),
    "qbm": (
        ("checkpoint", "qbm.target"),
        ("beta", "seed", "epochs", "lr", "grad_step", "out"),
        {"beta": 1.0, "seed": 0, "epochs": 200, "lr": 0.1, "grad_step": 1e-3},
    ),
    "phase-scan": (
        ("family.kind", "grid.h"),
        _FAMILY + ("grid.t", "scan.dh", "seed", "out"),
        {"family.j": 1.0, "scan.dh": 1e-3, "seed": 0},
    ),
    "oracle": (
        ("family.kind", "grid.h"),
        _FAMILY + ("beta", "seed", "out"),
        {"family.j": 1.0, "beta": 1.0, "seed": 0},
    ),
}


@dataclass
class RunConfig:
    command: str
    family_kind: str | None = None
    family_n: int | None = None
    family_j: float | None = None
    beta: float | None = None
    seed: int | None = None
    epochs: int | None = None
    lr: float | None = None
    grad_step: float | None = None
    l_enc: int | None = None
    l_hva: int | None = None
    l_su2: int | None = None
    hidden: tuple[int, ...] | None = None
    grid_train: str | None = None
    grid_test: str | None = None
    grid_h: str | None = None
    grid_t: str | None = None
    scan_dh: float | None = None
    checkpoint: str | None = None
    warm_h: str | None = None
    warm_epochs: int | None = None
    warm_lr: float | None = None
    warm_seeds: int | None = None
    qbm_target: tuple[float, ...] | None = None
    out: str | None = None

    def family(self) -> HamiltonianFamily:
        if self.family_kind == "tfim":
            return tfim_family(self.family_n, self.family_j)
        if self.family_kind == "kitaev":
            return kitaev_family(self.family_n, self.family_j)
        return heisenberg_family()


def _param_dim(kind: str) -> int:
    return 2 if kind == "heisenberg" else 1


def _range_problems(cfg: RunConfig) -> list[str]:
    bad = []

    def check(attr, ok, msg):
        v = getattr(cfg, attr)
        if v is not None and not ok(v):
            bad.append(f"{_ATTR_TO_KEY[attr]} = {_fmt(v)}: {msg}")

    check("family_kind", lambda v: v in FAMILY_KINDS,
          f"must be one of {', '.join(FAMILY_KINDS)}")
    check("family_n", lambda v: v >= 1, "need at least one qubit")
    check("family_n", lambda v: v <= 8, "more than 8 system qubits (16 total) is off the supported scale")
    check("beta", lambda v: v > 0, "must be positive")
    check("epochs", lambda v: v >= 0, "must be nonnegative")
    check("lr", lambda v: v > 0, "must be positive")
    check("grad_step", lambda v: v > 0, "must be positive")
    check("l_enc", lambda v: v >= 1, "need at least one encoding layer")
    check("l_su2", lambda v: v >= 1, "need at least one rotation layer")
    check("l_hva", lambda v: v >= 0, "must be nonnegative")
    check("hidden", lambda v: len(v) > 0 and all(w >= 1 for w in v),
          "hidden widths must be positive")
    check("scan_dh", lambda v: 0 < v <= 0.1, "must be in (0, 0.1]")
    check("warm_epochs", lambda v: v >= 0, "must be nonnegative")
    check("warm_lr", lambda v: v > 0, "must be positive")
    check("warm_seeds", lambda v: v >= 1, "need at least one seed")
    check("qbm_target", lambda v: all(p >= 0 for p in v) and abs(sum(v) - 1.0) <= 1e-9,
          "must be a probability vector")

    if cfg.family_kind in ("tfim", "kitaev") and cfg.family_n is None:
        bad.append(f"family.n is required for family.kind = {cfg.family_kind}")
    if cfg.family_kind == "heisenberg":
        if cfg.family_n not in (None, 2):
            bad.append("family.n must be 2 for the heisenberg family")
        cfg.family_n = 2

    if cfg.family_kind in FAMILY_KINDS:
        p = _param_dim(cfg.family_kind)
        for attr in ("grid_train", "grid_test", "grid_h"):
            text = getattr(cfg, attr)
            if text is not None and len(parse_gridspec(text)) != p:
                bad.append(
                    f"{_ATTR_TO_KEY[attr]} = {text}: wants {p} axes for {cfg.family_kind}"
                )
    if cfg.grid_t is not None and len(parse_gridspec(cfg.grid_t)) != 1:
        bad.append(f"grid.t = {cfg.grid_t}: temperature grid takes one axis")
    if cfg.command == "phase-scan" and cfg.family_kind == "heisenberg":
        bad.append("phase-scan sweeps a single field; the heisenberg family has two")
    return bad


def _read_pairs(path: str) -> list[tuple[str, str, str]]:
    try:
        with open(path, encoding="utf-8") as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise ParseError(f"cannot read config {path}: {e}") from None
    pairs = []
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ParseError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        pairs.append((key.strip(), value.strip(), f"{path}:{lineno}"))
    return pairs


def parse_config(
    path: str | None = None,
    overrides: tuple[str, ...] = (),
    command: str | None = None,
) -> RunConfig:
    """Parse and fully validate a run description.

    File keys load first, override flags (KEY=VALUE) replace them, and a
    subcommand given on the command line must agree with any `command` key.
    Raises ParseError on syntax problems, ValidationError with the complete
    list of semantic ones.
    """
    pairs = _read_pairs(path) if path is not None else []
    for item in overrides:
        if "=" not in item:
            raise ParseError(f"override {item!r}: expected KEY=VALUE")
        key, _, value = item.partition("=")
        pairs.append((key.strip(), value.strip(), f"override {item!r}"))

    problems: list[str] = []
    raw: dict[str, str] = {}
    for key, value, context in pairs:
        if key not in KEYS:
            problems.append(f"{context}: unknown key {key!r}")
        else:
            raw[key] = value

    cmd = command
    if "command" in raw:
        if cmd is None:
            cmd = raw["command"]
        elif raw["command"] != cmd:
            problems.append(
                f"config says command = {raw['command']}, invoked as {cmd}"
            )
        del raw["command"]
    if cmd is None:
        problems.append("no command given")
        raise ValidationError(problems)
    if cmd not in COMMAND_KEYS:
        problems.append(f"unknown command {cmd!r}; choose from {', '.join(COMMANDS)}")
        raise ValidationError(problems)

    required, optional, defaults = COMMAND_KEYS[cmd]
    allowed = set(required) | set(optional) | {"out"}
    cfg = RunConfig(command=cmd)
    for key, value in raw.items():
        if key not in allowed:
            problems.append(f"key {key!r} is not used by {cmd}")
            continue
        attr, parse = KEYS[key]
        try:
            setattr(cfg, attr, parse(value))
        except (ValueError, ParseError) as e:
            detail = e if isinstance(e, ParseError) else f"bad value {value!r}"
            problems.append(f"key {key!r}: {detail}")
    for key in required:
        if getattr(cfg, KEYS[key][0]) is None:
            problems.append(f"{cmd} requires key {key!r}")
    for key, value in defaults.items():
        if getattr(cfg, KEYS[key][0]) is None:
            setattr(cfg, KEYS[key][0], value)
    if cfg.out is None:
        cfg.out = os.environ.get(DEFAULT_OUT_ENV, "runs")

    if not problems:
        problems = _range_problems(cfg)
    if problems:
        raise ValidationError(problems)
    return cfg


def serialize_config(cfg: RunConfig) -> str:
    """Canonical text form; parse_config of it reproduces cfg exactly."""
    lines = []
    for key in KEY_ORDER:
        attr, _ = KEYS[key]
        value = getattr(cfg, attr)
        if value is not None:
            lines.append(f"{key} = {_fmt(value)}")
    return "\n".join(lines) + "\n"


def config_hash(cfg: RunConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode("utf-8")).hexdigest()
