"""Truncated atom-field density states and their diagonal projections.

A :class:`DensityState` stores the density matrix as three
``(n_max+1, n_max+1)`` complex blocks::

    a[n, m] = <g,n|rho|g,m>
    b[n, m] = <e,n|rho|e,m>
    c[n, m] = <g,n|rho|e,m>

The remaining block is implicit, ``<e,n|rho|g,m> = conj(c[m, n])``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatchError, TruncationError

DEFAULT_TAIL_TOL = 1e-10


@dataclass
class DensityState:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=complex)
        self.b = np.asarray(self.b, dtype=complex)
        self.c = np.asarray(self.c, dtype=complex)
        shape = self.a.shape
        if len(shape) != 2 or shape[0] != shape[1] or shape[0] < 1:
            raise ShapeMismatchError(f"blocks must be square, got {shape}")
        if self.b.shape != shape or self.c.shape != shape:
            raise ShapeMismatchError("a, b and c blocks must share one shape")

    @property
    def n_max(self) -> int:
        return self.a.shape[0] - 1

    @classmethod
    def zeros(cls, n_max: int) -> "DensityState":
        z = np.zeros((n_max + 1, n_max + 1), dtype=complex)
        return cls(z, z.copy(), z.copy())

    def copy(self) -> "DensityState":
        return DensityState(self.a.copy(), self.b.copy(), self.c.copy())

    def trace(self) -> float:
        return float(np.real(np.trace(self.a) + np.trace(self.b)))

    def hermiticity_error(self) -> float:
        return float(max(np.max(np.abs(self.a - self.a.conj().T)),
                         np.max(np.abs(self.b - self.b.conj().T))))

    def check(self, tol: float = 1e-10) -> None:
        """Raise ``ValueError`` if a state invariant is violated beyond ``tol``."""
        if self.hermiticity_error() > tol:
            raise ValueError("a and b blocks must be Hermitian")
        if abs(self.trace() - 1.0) > tol:
            raise ValueError(f"trace {self.trace()!r} differs from 1")
        diag = np.concatenate([np.diag(self.a), np.diag(self.b)])
        if np.max(np.abs(diag.imag)) > tol or np.min(diag.real) < -tol:
            raise ValueError("populations must be real and non-negative")

    # flat packing used by the ODE integrators
    def pack(self) -> np.ndarray:
        return np.concatenate([self.a.ravel(), self.b.ravel(), self.c.ravel()])

    @classmethod
    def unpack(cls, y: np.ndarray, n_max: int) -> "DensityState":
        k = (n_max + 1) ** 2
        shape = (n_max + 1, n_max + 1)
        return cls(y[:k].reshape(shape), y[k:2 * k].reshape(shape),
                   y[2 * k:3 * k].reshape(shape))

    def to_matrix(self) -> np.ndarray:
        """Full ``2(n_max+1)`` square matrix in the interleaved basis
        |g,0>, |e,0>, |g,1>, |e,1>, ..."""
        dim = 2 * (self.n_max + 1)
        rho = np.empty((dim, dim), dtype=complex)
        rho[0::2, 0::2] = self.a
        rho[1::2, 1::2] = self.b
        rho[0::2, 1::2] = self.c
        rho[1::2, 0::2] = self.c.conj().T
        return rho

    @classmethod
    def from_matrix(cls, rho: np.ndarray) -> "DensityState":
        rho = np.asarray(rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] % 2:
            raise ShapeMismatchError(f"expected an even square matrix, got {rho.shape}")
        return cls(rho[0::2, 0::2].copy(), rho[1::2, 1::2].copy(), rho[0::2, 1::2].copy())


@dataclass
class PopulationState:
    """Diagonal populations of the ground (``a_diag``) and excited
    (``b_diag``) atomic manifolds, indexed by photon number."""

    a_diag: np.ndarray
    b_diag: np.ndarray

    def __post_init__(self):
        self.a_diag = np.asarray(self.a_diag, dtype=float)
        self.b_diag = np.asarray(self.b_diag, dtype=float)
        if self.a_diag.ndim != 1 or self.a_diag.shape != self.b_diag.shape:
            raise ShapeMismatchError("a_diag and b_diag must be equal-length vectors")

    @property
    def n_max(self) -> int:
        return self.a_diag.size - 1

    def trace(self) -> float:
        return float(self.a_diag.sum() + self.b_diag.sum())

    def check(self, tol: float = 1e-10) -> None:
        if abs(self.trace() - 1.0) > tol:
            raise ValueError(f"populations sum to {self.trace()!r}, not 1")
        if min(self.a_diag.min(), self.b_diag.min()) < -tol:
            raise ValueError("negative population")

    def pack(self) -> np.ndarray:
        return np.concatenate([self.a_diag, self.b_diag])

    @classmethod
    def unpack(cls, y: np.ndarray, n_max: int) -> "PopulationState":
        return cls(y[:n_max + 1].copy(), y[n_max + 1:].copy())


def fock_atom_state(n_photons: int, atom_excited: bool, n_max: int) -> DensityState:
    """Pure product state ``|atom, n_photons>``."""
    if not 0 <= n_photons <= n_max:
        raise TruncationError(f"photon number {n_photons} outside 0..{n_max}")
    state = DensityState.zeros(n_max)
    block = state.b if atom_excited else state.a
    block[n_photons, n_photons] = 1.0
    return state


def thermal_distribution(nbar: float, n_max: int, tail_tol: float = DEFAULT_TAIL_TOL) -> np.ndarray:
    """Bose-Einstein photon distribution renormalized over ``0..n_max``.

    Raises :class:`TruncationError` if the discarded tail exceeds ``tail_tol``.
    """
    if nbar < 0:
        raise ValueError("nbar must be non-negative")
    if nbar == 0:
        p = np.zeros(n_max + 1)
        p[0] = 1.0
        return p
    q = nbar / (nbar + 1.0)
    n = np.arange(n_max + 1)
    p = (1.0 - q) * q**n
    tail = q ** (n_max + 1)  # closed form of the geometric remainder
    if tail > tail_tol:
        raise TruncationError(
            f"thermal tail mass {tail:.3e} beyond n_max={n_max} exceeds {tail_tol:.1e}", tail=tail)
    return p / p.sum()


def thermal_atom_state(nbar: float, atom_excited: bool, n_max: int,
                       tail_tol: float = DEFAULT_TAIL_TOL) -> DensityState:
    """Thermal field tensored with a pure atomic projector."""
    p = thermal_distribution(nbar, n_max, tail_tol)
    state = DensityState.zeros(n_max)
    block = state.b if atom_excited else state.a
    block[np.diag_indices(n_max + 1)] = p
    return state


def diagonal_populations(state: DensityState) -> PopulationState:
    """Drop all coherences, keeping the real diagonals of ``a`` and ``b``."""
    return PopulationState(np.diag(state.a).real.copy(), np.diag(state.b).real.copy())
