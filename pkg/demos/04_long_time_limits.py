"""Waiting long enough for the asymptotic rules.

At resonance the vacuum empties at the slow counter-rotating rate v2, about
one event per 600 gt.  Over the first few hundred gt the excited population
is still rising, and since d<n>/dt = rate - (2 omega Omega / D) dP_e/dt the
photon slope sits below its asymptotic value.  The effective chain is linear
with constant coefficients, so exponentiating its generator reaches gt = 6000
in a handful of matrix products.
"""
import numpy as np
from scipy.linalg import expm

from rabidephase import PopulationState, asymptotic_predictions, fit_linear_slope, observables, preset
from rabidephase.effective import EffectiveRHS
from rabidephase.observables import TimeSeries

params = preset("fig1").params
pred = asymptotic_predictions(params)
n_max, dgt = 400, 10.0
step = expm(EffectiveRHS(params, n_max).matrix() * dgt / params.g)

y = np.zeros(2 * (n_max + 1))
y[0] = 1.0
records = []
for k in range(601):
    records.append(observables(PopulationState.unpack(y, n_max), t=k * dgt / params.g, g=params.g))
    y = step @ y
series = TimeSeries.from_records(records)

print("window (gt)      slope error   P_e slope/gt   worst P_e+<n sz> error")
for lo in (150, 375, 750, 1500, 3000):
    w = series.window(lo, 2 * lo)
    slope = fit_linear_slope(w.t, w.mean_n, window=1.0).value
    pe = fit_linear_slope(w.gt, w.p_e, window=1.0).value
    x = w.p_e + w.n_sigma_z
    xerr = np.max(np.abs(x / pred.limit_pe_plus_nsz - 1))
    print(f"[{lo:4d}, {2 * lo:4d}]    {slope / pred.slope_n - 1:+9.2%}    {pe:11.2e}    {xerr:10.1%}")

print(f"\nmass in the top two Fock levels at gt = 6000: {series.photon_dist[-1, -2:].sum():.1e}")
