"""Brute-force reference propagation through the full Liouvillian.

The generator acts on column-stacked density matrices,
``vec(rho)[i + j*dim] = rho[i, j]``, in the interleaved product basis
``|g,0>, |e,0>, |g,1>, |e,1>, ...`` (atom index fastest).  With that
convention ``vec(A rho B) = kron(B.T, A) @ vec(rho)``.

Dense storage is deliberate: the oracle exists to cross-check the structured
solver at small truncations, not to scale.
"""
from __future__ import annotations

import struct
import time
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from ._integrate import Tolerances, integrate, output_grid as resolve_grid
from .errors import RabiDephaseError, ShapeMismatchError, SizeError
from .exact import ExactRHS, Trajectory
from .observables import observables
from .params import ModelParams
from .states import DensityState

DEFAULT_MEMORY_CAP = 8 * 2**20  # admits n_max = 12 (about 7.3 MB)
EXPM_SIZE_LIMIT = 1000          # generator rows above which propagation falls back to RK


class ConvergenceError(RabiDephaseError):
    """Matrix exponential or fallback integration produced non-finite values."""


def system_operators(n_max: int):
    """Field annihilator, photon number, sigma_z and sigma_x on the interleaved space."""
    k = np.arange(n_max + 1, dtype=float)
    a_f = np.diag(np.sqrt(k[1:]), 1)
    n_f = np.diag(k)
    i_f = np.eye(n_max + 1)
    i_q = np.eye(2)
    sz_q = np.diag([-1.0, 1.0])           # (g, e)
    sx_q = np.array([[0.0, 1.0], [1.0, 0.0]])
    return (np.kron(a_f, i_q), np.kron(n_f, i_q), np.kron(i_f, sz_q), np.kron(i_f, sx_q))


def rabi_hamiltonian(params: ModelParams, n_max: int) -> np.ndarray:
    a, n, sz, sx = system_operators(n_max)
    return params.omega * n + 0.5 * params.Omega * sz + params.g * (a + a.T) @ sx


@dataclass
class Liouvillian:
    n_max: int
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return 2 * (self.n_max + 1)

    def trace_functional(self) -> np.ndarray:
        return np.eye(self.dim).ravel(order="F")

    def apply(self, state: DensityState) -> DensityState:
        v = self.matrix @ vec(state.to_matrix())
        return DensityState.from_matrix(unvec(v, self.dim))


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).ravel(order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape((dim, dim), order="F")


def build_liouvillian(params: ModelParams, n_max: int,
                      memory_cap: int = DEFAULT_MEMORY_CAP) -> Liouvillian:
    """Dense generator ``L`` with ``d vec(rho)/dt = L @ vec(rho)``."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    dim = 2 * (n_max + 1)
    nbytes = dim**4 * np.dtype(complex).itemsize
    if nbytes > memory_cap:
        raise SizeError(f"Liouvillian for n_max={n_max} needs {nbytes / 2**20:.1f} MiB, "
                        f"cap is {memory_cap / 2**20:.1f} MiB")
    _, n, sz, _ = system_operators(n_max)
    h = rabi_hamiltonian(params, n_max)
    eye = np.eye(dim)
    n2 = n @ n
    L = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    L += 0.5 * params.gamma_a * (np.kron(sz.T, sz) - np.kron(eye, eye))
    L += params.gamma_c * (2.0 * np.kron(n.T, n) - np.kron(eye, n2) - np.kron(n2.T, eye))
    return Liouvillian(n_max, L)


def propagate_oracle(L: Liouvillian, state0: DensityState, t: float,
                     tolerances: Tolerances = Tolerances(rtol=1e-11, atol=1e-13)) -> DensityState:
    """``rho(t) = expm(L t) rho(0)`` (or adaptive RK above ``EXPM_SIZE_LIMIT``)."""
    if state0.n_max != L.n_max:
        raise ShapeMismatchError("state truncation does not match the Liouvillian")
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return state0.copy()
    v0 = vec(state0.to_matrix())
    if L.matrix.shape[0] <= EXPM_SIZE_LIMIT:
        v = expm(L.matrix * t) @ v0
    else:
        v = integrate(lambda _, y: L.matrix @ y, v0, t, None, tolerances)[-1]
    if not np.all(np.isfinite(v)):
        raise ConvergenceError("non-finite entries in propagated state")
    return DensityState.from_matrix(unvec(v, L.dim))


def integrate_oracle(params: ModelParams, state0: DensityState, t_final: float,
                     output_grid=None, memory_cap: int = DEFAULT_MEMORY_CAP) -> Trajectory:
    """Sample the oracle propagation on an output grid.

    Consecutive samples are chained with one propagator per distinct step,
    so a uniform grid costs a single matrix exponential.
    """
    L = build_liouvillian(params, state0.n_max, memory_cap)
    times = resolve_grid(t_final, output_grid)
    cache = {}
    v = vec(state0.to_matrix())
    prev = 0.0
    states = []
    for t in times:
        dt = t - prev
        if dt > 0:
            key = round(dt, 12)
            if key not in cache:
                cache[key] = expm(L.matrix * dt)
            v = cache[key] @ v
        prev = t
        states.append(DensityState.from_matrix(unvec(v, L.dim)))
    records = [observables(s, t, params.g) for s, t in zip(states, times)]
    return Trajectory(times, states, records, params)


@dataclass(frozen=True)
class StateDeviation:
    max: float
    a: float
    b: float
    c: float


def compare_states(x: DensityState, y: DensityState) -> StateDeviation:
    """Largest absolute coefficient difference, overall and per block."""
    if x.n_max != y.n_max:
        raise ShapeMismatchError(f"truncations differ: {x.n_max} vs {y.n_max}")
    da = float(np.max(np.abs(x.a - y.a)))
    db = float(np.max(np.abs(x.b - y.b)))
    dc = float(np.max(np.abs(x.c - y.c)))
    return StateDeviation(max(da, db, dc), da, db, dc)


def min_eigenvalue(state: DensityState) -> float:
    rho = state.to_matrix()
    return float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())


# binary dump: int64 LE generator dimension D, then D*D (re, im) float64 LE pairs, row-major
_HEADER = struct.Struct("<q")


def dump_liouvillian(L: Liouvillian, path) -> None:
    D = L.matrix.shape[0]
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(D))
        fh.write(np.ascontiguousarray(L.matrix, dtype="<c16").tobytes(order="C"))


def load_liouvillian_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        (D,) = _HEADER.unpack(fh.read(_HEADER.size))
        data = np.frombuffer(fh.read(), dtype="<c16")
    if data.size != D * D:
        raise ShapeMismatchError(f"expected {D * D} entries, found {data.size}")
    return data.reshape(D, D).astype(complex)


def benchmark_rhs(params: ModelParams, n_max_values, repeats: int = 200,
                  memory_cap: int = 64 * 2**20, seed: int = 0):
    """Time one structured RHS evaluation against one dense generator product.

    Returns a list of dicts with keys ``n_max``, ``coefficients``,
    ``generator_entries``, ``structured_s`` and ``oracle_s`` (``None`` above
    the memory cap).
    """
    rng = np.random.default_rng(seed)
    rows = []
    for n_max in n_max_values:
        size = 3 * (n_max + 1) ** 2
        y = rng.normal(size=size) + 1j * rng.normal(size=size)
        rhs = ExactRHS(params, n_max)
        t0 = time.perf_counter()
        for _ in range(repeats):
            rhs(0.0, y)
        structured = (time.perf_counter() - t0) / repeats
        oracle_s = None
        dim = 2 * (n_max + 1)
        try:
            L = build_liouvillian(params, n_max, memory_cap).matrix
        except SizeError:
            L = None
        if L is not None:
            v = rng.normal(size=dim * dim) + 0j
            t0 = time.perf_counter()
            for _ in range(repeats):
                L @ v
            oracle_s = (time.perf_counter() - t0) / repeats
        rows.append(dict(n_max=n_max, coefficients=size, generator_entries=dim**4,
                         structured_s=structured, oracle_s=oracle_s))
    return rows
