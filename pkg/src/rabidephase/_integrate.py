"""Time stepping shared by the exact, effective and oracle engines."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import StepFailureError


@dataclass(frozen=True)
class Tolerances:
    """Integrator settings.

    ``fixed_step`` switches from the adaptive Dormand-Prince 5(4) pair to a
    classic fourth-order Runge-Kutta with the given maximal step, which is
    bitwise reproducible across runs.
    """

    rtol: float = 1e-8
    atol: float = 1e-10
    fixed_step: float | None = None


def output_grid(t_final, grid=None):
    if grid is None:
        grid = np.array([0.0, t_final])
    grid = np.asarray(grid, dtype=float)
    if t_final <= 0:
        raise ValueError("t_final must be positive")
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("output grid must be a non-empty vector")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("output grid must be strictly increasing")
    if grid[0] < 0 or grid[-1] > t_final * (1 + 1e-12):
        raise ValueError("output grid must lie within [0, t_final]")
    return grid


def _rk4(fun, y0, grid, h_max):
    out = np.empty((grid.size, y0.size), dtype=y0.dtype)
    t, y = 0.0, y0.copy()
    for k, target in enumerate(grid):
        span = target - t
        if span > 0:
            steps = int(np.ceil(span / h_max - 1e-9))
            h = span / steps
            for _ in range(steps):
                k1 = fun(t, y)
                k2 = fun(t + h / 2, y + h / 2 * k1)
                k3 = fun(t + h / 2, y + h / 2 * k2)
                k4 = fun(t + h, y + h * k3)
                y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
                t += h
            t = target
        out[k] = y
    return out


def integrate(fun, y0, t_final, grid, tol: Tolerances):
    """Integrate ``y' = fun(t, y)`` from 0 and return samples on ``grid``
    (shape ``(len(grid), len(y0))``)."""
    grid = output_grid(t_final, grid)
    y0 = np.asarray(y0)
    if tol.fixed_step is not None:
        if tol.fixed_step <= 0:
            raise ValueError("fixed_step must be positive")
        return _rk4(fun, y0, grid, tol.fixed_step)
    sol = solve_ivp(fun, (0.0, float(t_final)), y0, method="RK45", t_eval=grid,
                    rtol=tol.rtol, atol=tol.atol)
    if sol.status < 0:
        raise StepFailureError(sol.message)
    return sol.y.T
