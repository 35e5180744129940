"""How the generation rate depends on detuning and dephasing.

The effective chain has two channels.  The rotating channel (rate v1) moves
excitations between atom and field; the counter-rotating channel (rate v2)
creates or destroys them in pairs.  Dephasing broadens both, and the net
photon rate is 2 gamma g^2 / (omega^2 + Omega^2 + gamma^2).
"""
import numpy as np

from rabidephase import ModelParams, asymptotic_predictions, dephasing_rates

g = 0.04
print("dephasing scan at resonance (omega = Omega = 1)")
print("  gamma      v1          v2          rate        P_e+<n sz> limit")
for gamma in (0.0, 0.01, 0.08, 0.5, 1.0, 2.0, 5.0):
    p = ModelParams(1.0, 1.0, g, gamma_a=gamma)
    v1, v2 = dephasing_rates(p)
    pred = asymptotic_predictions(p)
    print(f"  {gamma:5.2f}  {v1:.4e}  {v2:.4e}  {pred.slope_n:.4e}  {pred.limit_pe_plus_nsz:+.5f}")

best = np.sqrt(2.0)
print(f"\nat omega = Omega = 1 the rate peaks at gamma = sqrt(2) = {best:.4f}: "
      f"{asymptotic_predictions(ModelParams(1, 1, g, best)).slope_n:.4e}")

print("\natomic frequency scan (omega = 1, gamma = 0.08)")
print("  Omega    rate        <n2 sz>/<n> limit")
for Omega in (0.2, 0.5, 1.0, 1.5, 3.0):
    pred = asymptotic_predictions(ModelParams(1.0, Omega, g, 0.08))
    print(f"  {Omega:4.1f}   {pred.slope_n:.4e}  {pred.n2sz_ratio:+.5f}")

print("\ncavity dephasing enters only through gamma = gamma_a + gamma_c:")
for ga, gc in ((0.08, 0.0), (0.0, 0.08), (0.04, 0.04)):
    print(f"  gamma_a={ga:.2f} gamma_c={gc:.2f}  rate "
          f"{asymptotic_predictions(ModelParams(1, 1, g, ga, gc)).slope_n:.6e}")
