"""Dense complex linear algebra and quantum-information metrics.

States live in numpy arrays: a pure state over n qubits is a complex vector of
length 2**n, a density matrix a 2**n x 2**n complex matrix.  Qubit 0 is the
most significant bit of the basis index throughout the package.  All arrays
are complex128; the stated tolerances are unreachable in single precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    InvalidDensityMatrix,
    NotHermitian,
    NotNormalized,
    NotSquare,
    ZeroSupport,
)

ENTROPY_CLAMP = 1e-12
KL_FLOOR = 1e-12


@dataclass
class Spectrum:
    """Eigendecomposition of a Hermitian matrix: ascending eigenvalues, column eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _require_square(m: np.ndarray) -> int:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {m.shape}")
    return m.shape[0]


def _require_hermitian(m: np.ndarray) -> None:
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    if np.abs(m - m.conj().T).max(initial=0.0) > 1e-10 * scale:
        raise NotHermitian("matrix is not Hermitian within tolerance")


def check_density_matrix(rho: np.ndarray, *, trace_tol: float = 1e-8) -> None:
    """Raise InvalidDensityMatrix unless rho is square, Hermitian, and unit trace."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidDensityMatrix(f"expected a square matrix, got shape {rho.shape}")
    d = rho.shape[0]
    if d & (d - 1):
        raise InvalidDensityMatrix(f"dimension {d} is not a power of two")
    if np.abs(rho - rho.conj().T).max() > 1e-8:
        raise InvalidDensityMatrix("density matrix is not Hermitian")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > trace_tol:
        raise InvalidDensityMatrix(f"trace {tr} differs from 1")


def hermitian_eig(m: np.ndarray) -> Spectrum:
    """Eigendecomposition with ascending eigenvalues; input must be Hermitian."""
    _require_square(m)
    _require_hermitian(m)
    w, v = np.linalg.eigh(m)
    return Spectrum(eigenvalues=w, eigenvectors=v)


def expm_hermitian(m: np.ndarray, scale: float) -> np.ndarray:
    """exp(scale * m) for Hermitian m, via the spectral decomposition."""
    spec = hermitian_eig(m)
    w = np.exp(scale * spec.eigenvalues)
    v = spec.eigenvectors
    return (v * w) @ v.conj().T


def partial_trace(state: np.ndarray, keep) -> np.ndarray:
    """Reduced density matrix over the qubits in `keep` (ascending order).

    Accepts a pure state (1-D) or a density matrix (2-D).
    """
    keep = sorted(set(int(q) for q in keep))
    if state.ndim == 1:
        dim = state.shape[0]
    elif state.ndim == 2:
        dim = _require_square(state)
    else:
        raise DimensionMismatch(f"expected a vector or matrix, got ndim {state.ndim}")
    n = dim.bit_length() - 1
    if 2**n != dim:
        raise DimensionMismatch(f"length {dim} is not a power of two")
    if not keep:
        raise IndexOutOfRange("keep set is empty")
    if keep[0] < 0 or keep[-1] >= n:
        raise IndexOutOfRange(f"keep {keep} out of range for {n} qubits")
    traced = [q for q in range(n) if q not in keep]
    dk = 2 ** len(keep)
    if state.ndim == 1:
        a = state.reshape([2] * n).transpose(keep + traced).reshape(dk, -1)
        return a @ a.conj().T
    # Density matrix: row and column multi-indices, contract the traced pairs.
    r = state.reshape([2] * (2 * n))
    row = list(range(n))
    col = list(range(n, 2 * n))
    for q in traced:
        col[q] = row[q]
    out = [row[q] for q in keep] + [col[q] for q in keep]
    return np.einsum(r, row + col, out).reshape(dk, dk)


def von_neumann_entropy(rho: np.ndarray) -> float:
    """S = -sum(lam * ln lam) in nats; eigenvalues below 1e-12 count as zero."""
    check_density_matrix(rho)
    w = np.linalg.eigvalsh(rho)
    w = w[w > ENTROPY_CLAMP]
    if w.size == 0:
        return 0.0
    return float(-np.dot(w, np.log(w)))


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity F = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2, in [0, 1]."""
    _require_square(rho)
    _require_square(sigma)
    if rho.shape != sigma.shape:
        raise DimensionMismatch(f"shapes {rho.shape} and {sigma.shape} differ")
    root = _psd_sqrt(rho)
    w = np.linalg.eigvalsh(root @ sigma @ root)
    w = np.clip(w, 0.0, None)
    f = float(np.sqrt(w).sum() ** 2)
    return min(max(f, 0.0), 1.0)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """D = (1/2) Tr |rho - sigma|."""
    _require_square(rho)
    _require_square(sigma)
    if rho.shape != sigma.shape:
        raise DimensionMismatch(f"shapes {rho.shape} and {sigma.shape} differ")
    w = np.linalg.eigvalsh(rho - sigma)
    return float(0.5 * np.abs(w).sum())


def kl_divergence(p: np.ndarray, q: np.ndarray, floor: float | None = KL_FLOOR) -> float:
    """KL(p || q) in nats.

    q is floored at `floor` before the log so that underflowing-but-positive
    model distributions stay usable.  Pass floor=None to disable flooring, in
    which case q must carry the support of p.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DimensionMismatch(f"shapes {p.shape} and {q.shape} differ")
    if p.min(initial=0.0) < -1e-12 or q.min(initial=0.0) < -1e-12:
        raise NotNormalized("negative entries in a probability vector")
    if abs(p.sum() - 1.0) > 1e-9 or abs(q.sum() - 1.0) > 1e-9:
        raise NotNormalized("probability vectors must sum to 1 within 1e-9")
    support = p > 0
    if floor is None:
        if np.any(q[support] < KL_FLOOR):
            raise ZeroSupport("q vanishes where p has support")
        qs = q[support]
    else:
        qs = np.maximum(q[support], floor)
    ps = p[support]
    return float(np.dot(ps, np.log(ps / qs)))
