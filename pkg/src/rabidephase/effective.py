"""Effective population dynamics after adiabatic elimination of the coherences.

Once the atom-field coherences have relaxed, the diagonal populations obey a
classical birth-death chain on the ladder ``(g, n) <-> (e, n +- 1)``::

    (g, n) -> (e, n-1)  rate v1 * n        (rotating channel)
    (g, n) -> (e, n+1)  rate v2 * (n+1)    (anti-rotating channel)
    (e, n) -> (g, n+1)  rate v1 * (n+1)
    (e, n) -> (g, n-1)  rate v2 * n

with ``(v1, v2)`` from :func:`~rabidephase.params.dephasing_rates`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._integrate import Tolerances, integrate, output_grid as resolve_grid
from .exact import DEFAULT_TRUNCATION_THRESHOLD, guard_truncation
from .observables import TimeSeries, observables
from .params import ModelParams, dephasing_rates, f_coefficient
from .states import DensityState, PopulationState, diagonal_populations

BOUNDARIES = ("reflecting", "open")


class EffectiveRHS:
    """Generator of the rate equations on packed ``[a_diag, b_diag]`` vectors.

    ``boundary="reflecting"`` drops transitions that would leave the
    truncated ladder, so total probability is conserved exactly and the chain
    matches the adiabatic limit of the truncated exact model.
    ``boundary="open"`` keeps the full loss rates at ``n_max`` (probability
    then leaks out through the top level).
    """

    def __init__(self, params: ModelParams, n_max: int, boundary: str = "reflecting"):
        if boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}")
        self.n_max = n_max
        v1, v2 = dephasing_rates(params)
        n = np.arange(n_max + 1, dtype=float)
        up = v2 * (n + 1)     # (g,n) -> (e,n+1)
        up_e = v1 * (n + 1)   # (e,n) -> (g,n+1)
        if boundary == "reflecting":
            up[-1] = 0.0
            up_e[-1] = 0.0
        self.loss_a = v1 * n + up
        self.loss_b = v2 * n + up_e
        self.down_a = v1 * n  # (g,n) -> (e,n-1)
        self.down_b = v2 * n  # (e,n) -> (g,n-1)
        self.up_a = v2 * (n + 1)
        self.up_b = v1 * (n + 1)

    def __call__(self, t, y):
        s = self.n_max + 1
        a, b = y[:s], y[s:]
        da = -self.loss_a * a
        db = -self.loss_b * b
        # gains: b_{n-1} -> a_n via up_b[n-1]; b_{n+1} -> a_n via down_b[n+1]
        da[1:] += self.up_b[:-1] * b[:-1]
        da[:-1] += self.down_b[1:] * b[1:]
        db[1:] += self.up_a[:-1] * a[:-1]
        db[:-1] += self.down_a[1:] * a[1:]
        return np.concatenate([da, db])

    def matrix(self) -> np.ndarray:
        """Dense generator ``M`` with ``M @ y == self(t, y)``; useful with ``expm``
        for very long horizons where explicit stepping is wasteful."""
        def coupling(up, down):
            return np.diag(up[:-1], -1) + np.diag(down[1:], 1)
        return np.block([[np.diag(-self.loss_a), coupling(self.up_b, self.down_b)],
                         [coupling(self.up_a, self.down_a), np.diag(-self.loss_b)]])


def effective_rhs(params: ModelParams, pop: PopulationState,
                  boundary: str = "reflecting") -> PopulationState:
    y = EffectiveRHS(params, pop.n_max, boundary)(0.0, pop.pack())
    return PopulationState.unpack(y, pop.n_max)


def adiabatic_coherences(params: ModelParams, pop: PopulationState) -> np.ndarray:
    """Quasi-stationary coherences ``c[n, m]`` for purely diagonal ``a`` and ``b``.

    Only the ``m = n +- 1`` entries can be nonzero.
    """
    size = pop.n_max + 1
    k = np.arange(size, dtype=float)
    n, m = k[:, None], k[None, :]
    a = np.diag(pop.a_diag).astype(complex)
    b = np.diag(pop.b_diag).astype(complex)
    b_up = np.zeros_like(b)
    b_up[:-1] = b[1:]          # b[n+1, m]
    b_dn = np.zeros_like(b)
    b_dn[1:] = b[:-1]          # b[n-1, m]
    a_dn = np.zeros_like(a)
    a_dn[:, 1:] = a[:, :-1]    # a[n, m-1]
    a_up = np.zeros_like(a)
    a_up[:, :-1] = a[:, 1:]    # a[n, m+1]
    bracket = (np.sqrt(n + 1) * b_up - np.sqrt(m) * a_dn
               + np.sqrt(n) * b_dn - np.sqrt(m + 1) * a_up)
    return params.g / f_coefficient(params, n, m) * bracket


def adiabatic_state(params: ModelParams, pop: PopulationState) -> DensityState:
    """Density state with diagonal populations and relaxed coherences."""
    return DensityState(np.diag(pop.a_diag), np.diag(pop.b_diag),
                        adiabatic_coherences(params, pop))


@dataclass
class PopulationTrajectory:
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


def integrate_effective(params: ModelParams, pop0, t_final: float, output_grid=None,
                        tolerances: Tolerances = Tolerances(),
                        truncation_threshold: float = DEFAULT_TRUNCATION_THRESHOLD,
                        boundary: str = "reflecting",
                        negativity_tol: float = 1e-9) -> PopulationTrajectory:
    """Integrate the rate equations.

    ``pop0`` may be a :class:`DensityState`, in which case its coherences are
    discarded.  Populations more negative than ``negativity_tol`` raise
    ``ValueError``; they are never clipped.
    """
    if isinstance(pop0, DensityState):
        pop0 = diagonal_populations(pop0)
    rhs = EffectiveRHS(params, pop0.n_max, boundary)
    ys = integrate(rhs, pop0.pack(), t_final, output_grid, tolerances)
    times = resolve_grid(t_final, output_grid)
    states = [PopulationState.unpack(y, pop0.n_max) for y in ys]
    guard_truncation(states, times, truncation_threshold)
    lowest = ys.min()
    if lowest < -negativity_tol:
        raise ValueError(f"population went negative ({lowest:.3e})")
    records = [observables(s, t, params.g) for s, t in zip(states, times)]
    return PopulationTrajectory(times, states, records, params)
