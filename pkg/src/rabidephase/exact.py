"""Exact coefficient equations of the dephased Rabi model in a truncated Fock basis.

The right-hand side acts directly on the ``(a, b, c)`` blocks of a
:class:`~rabidephase.states.DensityState`.  Coefficients with a photon
index above ``n_max`` are treated as zero, which coincides with
truncating the field operators.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import rotating_frame_rhs
from ._integrate import Tolerances, integrate, output_grid as resolve_grid
from .errors import TruncationError
from .observables import ObservableRecord, TimeSeries, observables
from .params import ModelParams, f_coefficient
from .states import DensityState

DEFAULT_TRUNCATION_THRESHOLD = 1e-8


class ExactRHS:
    """Right-hand side of the coefficient equations for one truncation.

    ``blocks`` evaluates the lab-frame derivative.  Calling the object gives
    the derivative of packed coefficients in the frame rotating with
    ``omega*n + Omega*sigma_z/2``; that frame removes the free oscillation at
    ``omega*(m-n)`` which otherwise limits the step size of far off-diagonal
    entries.  :meth:`to_lab` and :meth:`to_rotating` convert between frames.
    """

    def __init__(self, params: ModelParams, n_max: int):
        self.params = params
        self.n_max = n_max
        k = np.arange(n_max + 1, dtype=float)
        n, m = k[:, None], k[None, :]
        d = m - n
        self.decay_ab = -params.gamma_c * d * d
        self.decay_c = -(params.gamma_a + params.gamma_c * d * d)
        self.free = 1j * params.omega * d + self.decay_ab
        self.fc = 1j * f_coefficient(params, n, m)
        self.sq = np.sqrt(k)
        self.sq1 = np.sqrt(k + 1)
        self._k = k

    def coupling(self, a, b, c):
        """Terms proportional to g only."""
        sq, sq1 = self.sq, self.sq1
        cd = c.conj().T  # cd[n, m] = conj(c[m, n])
        da = np.zeros_like(a)
        db = np.zeros_like(b)
        dc = np.zeros_like(c)

        da[:, 1:] += sq[1:] * c[:, :-1]
        da[:, :-1] += sq1[:-1] * c[:, 1:]
        da[1:] -= sq[1:, None] * cd[:-1]
        da[:-1] -= sq1[:-1, None] * cd[1:]

        db[:, 1:] += sq[1:] * cd[:, :-1]
        db[:, :-1] += sq1[:-1] * cd[:, 1:]
        db[1:] -= sq[1:, None] * c[:-1]
        db[:-1] -= sq1[:-1, None] * c[1:]

        dc[:, 1:] += sq[1:] * a[:, :-1]
        dc[:, :-1] += sq1[:-1] * a[:, 1:]
        dc[:-1] -= sq1[:-1, None] * b[1:]
        dc[1:] -= sq[1:, None] * b[:-1]

        ig = 1j * self.params.g
        da *= ig
        db *= ig
        dc *= ig
        return da, db, dc

    def blocks(self, a, b, c):
        da, db, dc = self.coupling(a, b, c)
        da += self.free * a
        db += self.free * b
        dc += self.fc * c
        return da, db, dc

    def _split(self, y):
        s = self.n_max + 1
        k = s * s
        return y[:k].reshape(s, s), y[k:2 * k].reshape(s, s), y[2 * k:].reshape(s, s)

    def _phases(self, t):
        u = np.exp(1j * self.params.omega * t * self._k)
        pa = np.outer(u.conj(), u)  # exp(i omega (m-n) t)
        return pa, pa * np.exp(1j * self.params.Omega * t)

    def to_lab(self, t, y):
        pa, pc = self._phases(t)
        a, b, c = self._split(y)
        return np.concatenate([(a * pa).ravel(), (b * pa).ravel(), (c * pc).ravel()])

    def to_rotating(self, t, y):
        pa, pc = self._phases(t)
        a, b, c = self._split(y)
        return np.concatenate([(a / pa).ravel(), (b / pa).ravel(), (c / pc).ravel()])

    def __call__(self, t, y):
        p = self.params
        a, b, c = self._split(y)
        out = np.empty_like(y)
        da, db, dc = self._split(out)
        rotating_frame_rhs(a, b, c, np.ascontiguousarray(c.conj().T), self.decay_ab, self.decay_c, self.sq, self.sq1, p.g,
                           np.exp(1j * (p.Omega - p.omega) * t),
                           np.exp(1j * (p.omega + p.Omega) * t), da, db, dc)
        return out


def exact_rhs(params: ModelParams, state: DensityState) -> DensityState:
    """Time derivative of every coefficient, returned as a DensityState-shaped
    container (it is not itself a normalized state)."""
    da, db, dc = ExactRHS(params, state.n_max).blocks(state.a, state.b, state.c)
    return DensityState(da, db, dc)


@dataclass(frozen=True)
class TruncationCheck:
    passed: bool
    tail: float
    threshold: float


def check_truncation(state, threshold: float = DEFAULT_TRUNCATION_THRESHOLD) -> TruncationCheck:
    """Population held by the two highest Fock levels.

    Works for both density and population states.
    """
    if isinstance(state, DensityState):
        pa, pb = np.diag(state.a).real, np.diag(state.b).real
    else:
        pa, pb = state.a_diag, state.b_diag
    tail = float(np.sum(pa[-2:]) + np.sum(pb[-2:]))
    return TruncationCheck(tail <= threshold, tail, threshold)


@dataclass
class Trajectory:
    """States and observables of an exact run on its output grid.

    ``times`` are in model time units; ``gt`` multiplies them by the coupling.
    """

    times: np.ndarray
    states: list
    observables: list
    params: ModelParams

    @property
    def gt(self) -> np.ndarray:
        return self.times * self.params.g

    @property
    def series(self) -> TimeSeries:
        return TimeSeries.from_records(self.observables)

    def __len__(self):
        return len(self.times)


def guard_truncation(states, times, threshold):
    if threshold is None:
        return
    for t, state in zip(times, states):
        chk = check_truncation(state, threshold)
        if not chk.passed:
            raise TruncationError(
                f"top-two Fock population {chk.tail:.3e} exceeds {threshold:.1e} at t={t:g}; "
                "increase n_max", tail=chk.tail)


def integrate_exact(params: ModelParams, state0: DensityState, t_final: float,
                    output_grid=None, tolerances: Tolerances = Tolerances(),
                    truncation_threshold: float = DEFAULT_TRUNCATION_THRESHOLD) -> Trajectory:
    """Integrate the exact coefficient equations from ``state0``.

    Raises
    ------
    TruncationError
        If the top-two Fock levels hold more than ``truncation_threshold`` at
        any output time.  ``None`` disables the guard, which is appropriate
        when comparing against another engine at the same truncation.
    StepFailureError
        If the adaptive controller cannot make progress.
    """
    rhs = ExactRHS(params, state0.n_max)
    ys = integrate(rhs, state0.pack(), t_final, output_grid, tolerances)
    times = resolve_grid(t_final, output_grid)
    states = [DensityState.unpack(rhs.to_lab(t, y), state0.n_max) for t, y in zip(times, ys)]
    guard_truncation(states, times, truncation_threshold)
    records = [observables(s, t, params.g) for s, t in zip(states, times)]
    return Trajectory(times, states, records, params)
