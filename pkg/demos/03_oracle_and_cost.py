"""Cross-checking the structured solver against a brute-force Liouvillian.

The exact engine never forms the (2(N+1))^2 x (2(N+1))^2 generator; it
applies the master equation block by block.  For small truncations we can
afford the dense generator and a matrix exponential, which gives an
independent reference.  The cost table shows why the dense route stops
being an option past a dozen photons.
"""
import numpy as np

from rabidephase import (build_liouvillian, compare_states, fock_atom_state, integrate_exact,
                         preset, propagate_oracle)
from rabidephase.oracle import benchmark_rhs, min_eigenvalue

params = preset("fig1").params
n_max = 6
state0 = fock_atom_state(0, False, n_max)
L = build_liouvillian(params, n_max)
grid = np.array([1.0, 5.0, 10.0, 50.0]) / params.g
traj = integrate_exact(params, state0, grid[-1], grid, truncation_threshold=None)

print(f"n_max = {n_max}: generator is {L.matrix.shape[0]} x {L.matrix.shape[1]}")
print("   gt    max|exact - oracle|   min eigenvalue")
for t, state in zip(grid, traj.states):
    ref = propagate_oracle(L, state0, t)
    print(f"{t * params.g:5.0f}    {compare_states(state, ref).max:.3e}          "
          f"{min_eigenvalue(ref):+.1e}")

print("\nright-hand-side cost (seconds per evaluation)")
print("  n_max   structured    dense matvec   generator entries")
for row in benchmark_rhs(params, [2, 4, 8, 12, 20, 40], repeats=20):
    dense = "   (over cap)" if row["oracle_s"] is None else f"{row['oracle_s']:.2e}"
    print(f"  {row['n_max']:5d}   {row['structured_s']:.2e}     {dense:>12}   "
          f"{row['generator_entries']:>10d}")
