"""Photon-number and atomic observables, moment checks and asymptotics.

The observables are the low-order moments

    mean_n      <n>
    mean_n2     <n^2>
    p_e         excited-state probability
    n_sigma_z   <n sigma_z>
    n2_sigma_z  <n^2 sigma_z>

computed either from a full :class:`~rabidephase.states.DensityState` or from
diagonal populations only.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, fields

import numpy as np
from scipy import stats

from .errors import InsufficientPointsError, ShapeMismatchError
from .params import ModelParams, dephasing_rates
from .states import DensityState, PopulationState

SCALAR_FIELDS = ("t", "gt", "mean_n", "mean_n2", "var_n", "p_e",
                 "n_sigma_z", "n2_sigma_z", "trace")


@dataclass
class ObservableRecord:
    t: float
    gt: float
    mean_n: float
    mean_n2: float
    var_n: float
    p_e: float
    n_sigma_z: float
    n2_sigma_z: float
    trace: float
    photon_dist: np.ndarray = field(repr=False)


def _diagonals(state):
    if isinstance(state, DensityState):
        return np.diag(state.a).real, np.diag(state.b).real
    if isinstance(state, PopulationState):
        return state.a_diag, state.b_diag
    raise TypeError(f"unsupported state type {type(state).__name__}")


def observables(state, t: float = 0.0, g: float = 1.0) -> ObservableRecord:
    """Moments of ``state``; ``gt`` is reported as ``g * t``."""
    pa, pb = _diagonals(state)
    n = np.arange(pa.size, dtype=float)
    dist = pa + pb
    trace = dist.sum()
    mean_n = n @ dist
    mean_n2 = (n * n) @ dist
    return ObservableRecord(
        t=float(t), gt=float(g * t),
        mean_n=float(mean_n), mean_n2=float(mean_n2),
        var_n=float(mean_n2 - mean_n**2),
        p_e=float(pb.sum()),
        n_sigma_z=float(n @ (pb - pa)),
        n2_sigma_z=float((n * n) @ (pb - pa)),
        trace=float(trace),
        photon_dist=dist.copy(),
    )


@dataclass
class TimeSeries:
    """Column-oriented observable history of one run."""

    t: np.ndarray
    gt: np.ndarray
    mean_n: np.ndarray
    mean_n2: np.ndarray
    var_n: np.ndarray
    p_e: np.ndarray
    n_sigma_z: np.ndarray
    n2_sigma_z: np.ndarray
    trace: np.ndarray
    photon_dist: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        for name in SCALAR_FIELDS:
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        if any(getattr(self, f).shape != self.t.shape for f in SCALAR_FIELDS):
            raise ShapeMismatchError("all observable columns must have equal length")

    def __len__(self):
        return self.t.size

    @classmethod
    def from_records(cls, records) -> "TimeSeries":
        records = list(records)
        cols = {name: np.array([getattr(r, name) for r in records]) for name in SCALAR_FIELDS}
        width = max(r.photon_dist.size for r in records)
        dist = np.zeros((len(records), width))
        for i, r in enumerate(records):
            dist[i, :r.photon_dist.size] = r.photon_dist
        return cls(**cols, photon_dist=dist)

    def window(self, gt_min=-np.inf, gt_max=np.inf) -> "TimeSeries":
        mask = (self.gt >= gt_min) & (self.gt <= gt_max)
        cols = {name: getattr(self, name)[mask] for name in SCALAR_FIELDS}
        dist = None if self.photon_dist is None else self.photon_dist[mask]
        return TimeSeries(**cols, photon_dist=dist)


def as_series(obj) -> TimeSeries:
    if isinstance(obj, TimeSeries):
        return obj
    series = getattr(obj, "series", None)
    if isinstance(series, TimeSeries):
        return series
    raise TypeError(f"cannot extract observables from {type(obj).__name__}")


# ---------------------------------------------------------------------------
# closed-form results

@dataclass(frozen=True)
class AsymptoticSet:
    """Large-time predictions of the effective dynamics.

    Attributes
    ----------
    slope_n : float
        d<n>/dt, per unit time (divide by g for per unit gt).
    limit_pe_plus_nsz : float
        Limit of ``p_e + n_sigma_z``.
    n2sz_ratio : float
        Limit of ``n2_sigma_z / mean_n``.
    n2_rate_rule : tuple
        ``(c0, c1)`` with d<n^2>/dt -> c0 + c1 * <n>.
    quadratic_coeff : float
        Leading t**2 coefficient of <n^2> implied by the rate rule.
    """

    slope_n: float
    limit_pe_plus_nsz: float
    n2sz_ratio: float
    n2_rate_rule: tuple
    quadratic_coeff: float


def photon_rate(params: ModelParams) -> float:
    """Asymptotic photon generation rate 2*gamma*g**2 / (omega**2 + Omega**2 + gamma**2)."""
    return 2.0 * params.gamma * params.g**2 / params.denominator


def asymptotic_predictions(params: ModelParams) -> AsymptoticSet:
    rate = photon_rate(params)
    mix = params.omega * params.Omega / params.denominator
    return AsymptoticSet(
        slope_n=rate,
        limit_pe_plus_nsz=0.5 - mix,
        n2sz_ratio=-2.0 * mix,
        n2_rate_rule=(rate, 4.0 * rate),
        quadratic_coeff=2.0 * rate**2,
    )


def moment_identity_residual(traj, params: ModelParams) -> np.ndarray:
    """Residual of the general <n(t)> formula at every output time.

    ``<n(t)> - <n(0)> - 2/D * (g^2 gamma t - omega Omega (P_e(t) - P_e(0)))``
    with ``D = omega^2 + Omega^2 + gamma^2``; time is measured from the
    first sample.
    """
    s = as_series(traj)
    if len(s) < 2:
        raise InsufficientPointsError("need at least two samples")
    elapsed = s.t - s.t[0]
    rhs = (2.0 / params.denominator) * (
        params.g**2 * params.gamma * elapsed
        - params.omega * params.Omega * (s.p_e - s.p_e[0]))
    return (s.mean_n - s.mean_n[0]) - rhs


@dataclass
class MomentResiduals:
    """Finite-difference check of the moment equations on interior samples.

    ``residuals[name]`` is measured derivative minus predicted derivative;
    ``fd_error[name]`` estimates the finite-difference error by comparison
    with a doubled-spacing stencil (NaN where unavailable).
    """

    t: np.ndarray
    residuals: dict
    measured: dict
    fd_error: dict


def _centered(t, y):
    return (y[2:] - y[:-2]) / (t[2:] - t[:-2])


def _centered_wide(t, y):
    out = np.full(y.size - 2, np.nan)
    if y.size >= 5:
        out[1:-1] = (y[4:] - y[:-4]) / (t[4:] - t[:-4])
    return out


def moment_ode_residuals(traj, params: ModelParams, warn_ratio: float = 0.1) -> MomentResiduals:
    """Compare measured moment derivatives with the closed moment equations.

    Four equations are checked: ``mean_n``, ``p_e``, ``n_sigma_z`` and
    ``mean_n2``.  Derivatives are centered differences of the sampled
    series, so the check never touches solver internals.  The ``mean_n2``
    equation uses the measured ``n_sigma_z`` derivative.

    A ``RuntimeWarning`` is emitted when the estimated finite-difference
    error of any series exceeds ``warn_ratio`` times that series' derivative
    scale.
    """
    s = as_series(traj)
    if len(s) < 3:
        raise InsufficientPointsError("need at least three samples")
    v1, v2 = dephasing_rates(params)
    sl = slice(1, -1)
    n, pe, nsz, n2sz = s.mean_n[sl], s.p_e[sl], s.n_sigma_z[sl], s.n2_sigma_z[sl]
    x = pe + nsz

    measured = {name: _centered(s.t, getattr(s, name))
                for name in ("mean_n", "p_e", "n_sigma_z", "mean_n2")}
    predicted = {
        "mean_n": v2 + (v1 - v2) * x,
        "p_e": v2 - (v1 + v2) * x,
        "n_sigma_z": v2 - 2.0 * (v1 - v2) * n - (v1 + v2) * (x + 2.0 * n2sz),
        "mean_n2": (2.0 / params.denominator) * (
            params.gamma * params.g**2 * (1.0 + 4.0 * n)
            - params.omega * params.Omega * measured["n_sigma_z"]),
    }
    residuals = {k: measured[k] - predicted[k] for k in measured}
    # Richardson: D_h - D_2h ~ 3 * (error of D_h)
    fd_error = {k: np.abs(measured[k] - _centered_wide(s.t, getattr(s, k))) / 3.0
                for k in measured}

    for k in measured:
        scale = np.max(np.abs(measured[k])) if measured[k].size else 0.0
        err = np.nanmax(fd_error[k]) if np.any(np.isfinite(fd_error[k])) else 0.0
        if scale > 0 and err > warn_ratio * scale:
            warnings.warn(f"grid too coarse for {k}: finite-difference error {err:.2e} "
                          f"vs derivative scale {scale:.2e}", RuntimeWarning, stacklevel=2)
    return MomentResiduals(t=s.t[sl], residuals=residuals, measured=measured, fd_error=fd_error)


# ---------------------------------------------------------------------------
# fits

@dataclass(frozen=True)
class FitResult:
    value: float
    stderr: float
    n_points: int


def _tail(t, y, window):
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape:
        raise ShapeMismatchError("t and values must have equal length")
    if not 0 < window <= 1:
        raise ValueError("window must be a fraction in (0, 1]")
    start = t[-1] - window * (t[-1] - t[0]) if t.size else 0.0
    mask = t >= start - 1e-12 * max(1.0, abs(start))
    return t[mask], y[mask]


def fit_linear_slope(t, y, window: float = 0.5, min_points: int = 10) -> FitResult:
    """Least-squares slope over the final ``window`` fraction of the time span."""
    tt, yy = _tail(t, y, window)
    if tt.size < min_points:
        raise InsufficientPointsError(f"{tt.size} points in window, need {min_points}")
    res = stats.linregress(tt, yy)
    return FitResult(float(res.slope), float(res.stderr), int(tt.size))


def fit_quadratic_coeff(t, y, window: float = 0.5, min_points: int = 10) -> FitResult:
    """Leading coefficient of a degree-2 least-squares fit over the tail window."""
    tt, yy = _tail(t, y, window)
    if tt.size < min_points:
        raise InsufficientPointsError(f"{tt.size} points in window, need {min_points}")
    # center and scale time for conditioning
    t0, scale = tt.mean(), np.ptp(tt) or 1.0
    u = (tt - t0) / scale
    coef, cov = np.polyfit(u, yy, 2, cov="unscaled")
    dof = tt.size - 3
    resid = yy - np.polyval(coef, u)
    sigma2 = resid @ resid / dof if dof > 0 else 0.0
    return FitResult(float(coef[0] / scale**2),
                     float(np.sqrt(max(cov[0, 0] * sigma2, 0.0)) / scale**2),
                     int(tt.size))
