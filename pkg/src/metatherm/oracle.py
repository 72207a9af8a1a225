"""Exact reference thermodynamics via dense diagonalization.

Everything variational in this package is judged against these values.
Boltzmann weights are computed relative to the ground energy, so Gibbs states
and free energies stay finite at any beta; only the raw partition function can
overflow to inf for extreme beta * |E0|.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import hamiltonians, linalg
from .errors import EmptyGrid, NonPositiveBeta, TooLarge
from .hamiltonians import HamiltonianFamily, PauliSum

DEFAULT_DH = 1e-3
DEFAULT_T_GRID = np.arange(0.02, 1.0 + 1e-9, 0.02)


@dataclass
class ThermalPoint:
    beta: float
    gibbs_state: np.ndarray
    partition_fn: float
    free_energy: float


def exact_gibbs(hs: PauliSum, beta: float) -> ThermalPoint:
    """Gibbs state exp(-beta H)/Z with G = -(1/beta) ln Z."""
    if beta <= 0:
        raise NonPositiveBeta(f"beta must be positive, got {beta}")
    if hs.n_qubits > hamiltonians.MAX_DENSE_QUBITS:
        raise TooLarge(f"{hs.n_qubits} qubits exceeds the dense oracle limit")
    spec = linalg.hermitian_eig(hamiltonians.to_dense(hs))
    w, v = spec.eigenvalues, spec.eigenvectors
    shifted = np.exp(-beta * (w - w[0]))
    z_shifted = float(shifted.sum())
    rho = (v * (shifted / z_shifted)) @ v.conj().T
    free_energy = float(w[0] - np.log(z_shifted) / beta)
    with np.errstate(over="ignore"):
        partition = float(np.exp(-beta * w[0]) * z_shifted)
    return ThermalPoint(
        beta=beta, gibbs_state=rho, partition_fn=partition, free_energy=free_energy
    )


def free_energy_of_state(rho: np.ndarray, hs: PauliSum, T: float) -> float:
    """Variational free energy <H> - T S(rho)."""
    if T <= 0:
        raise NonPositiveBeta(f"temperature must be positive, got {T}")
    energy = hamiltonians.expectation(hs, rho)
    return energy - T * linalg.von_neumann_entropy(rho)


def magnetization(family: HamiltonianFamily, h: float, T: float) -> float:
    """<sum sigma-z> on the exact Gibbs state of family at field h."""
    if family.param_dim != 1:
        raise ValueError("magnetization scan needs a single-field family")
    point = exact_gibbs(family.build([h]), 1.0 / T)
    return hamiltonians.expectation(
        hamiltonians.build_total_z(family.n_qubits), point.gibbs_state
    )


def susceptibility(
    family: HamiltonianFamily, h: float, T: float, dh: float = DEFAULT_DH
) -> float:
    """Central difference dM/dh at (h, T)."""
    if not 0 < dh <= 0.1:
        raise ValueError(f"dh must be in (0, 0.1], got {dh}")
    return (magnetization(family, h + dh, T) - magnetization(family, h - dh, T)) / (
        2.0 * dh
    )


def crossover_temperature(
    family: HamiltonianFamily, h: float, T_grid=None, dh: float = DEFAULT_DH
) -> float:
    """Grid temperature maximizing chi(h, T); ties resolve to the smaller T."""
    grid = DEFAULT_T_GRID if T_grid is None else np.asarray(T_grid, dtype=float)
    if grid.size < 5:
        raise EmptyGrid(f"need at least 5 grid points, got {grid.size}")
    if np.any(np.diff(grid) <= 0):
        raise EmptyGrid("temperature grid must be strictly ascending")
    chi = np.array([susceptibility(family, h, T, dh) for T in grid])
    return float(grid[int(np.argmax(chi))])


def phase_scan(
    family: HamiltonianFamily, h_values, T_grid=None, dh: float = DEFAULT_DH
):
    """Susceptibility surface and crossover curve over a field/temperature grid.

    Returns (rows, crossover) where rows is a list of (h, T, chi) triples in
    scan order and crossover a list of (h, T_star) pairs.
    """
    grid = DEFAULT_T_GRID if T_grid is None else np.asarray(T_grid, dtype=float)
    if grid.size < 5:
        raise EmptyGrid(f"need at least 5 grid points, got {grid.size}")
    rows = []
    crossover = []
    for h in np.asarray(h_values, dtype=float):
        chi = np.array([susceptibility(family, h, T, dh) for T in grid])
        rows.extend((float(h), float(T), float(c)) for T, c in zip(grid, chi))
        crossover.append((float(h), float(grid[int(np.argmax(chi))])))
    return rows, crossover
