"""Truncation error study: what a too-small ladder cutoff does to a spectrum.

An under-truncated SO2 run is compared against a converged reference.  Low
peaks converge first; high peaks are pushed up in energy (blue-shifted) by
the boundary of the truncated oscillator algebra, which is the error mode
specific to Fock-basis spectral methods.
"""

import numpy as np

from vibronic import ModeCutoffs, bundled_problem, converge_sweep, l1_distance, spectrum_pipeline

so2 = bundled_problem("so2")

exact_sticks, _, exact = spectrum_pipeline(so2, ModeCutoffs((22, 8)), route="ladder")
approx_sticks, _, approx = spectrum_pipeline(so2, ModeCutoffs((9, 8)), route="ladder")
print(f"L1 distance, converged vs L_max=9 on the displaced mode: "
      f"{l1_distance(exact, approx):.3f}")

print("\nper-stick drift (intensity-ranked pairs):")
order_a = np.argsort(approx_sticks.intensities)[::-1]
order_e = np.argsort(exact_sticks.intensities)[::-1]
for k in range(8):
    ea = approx_sticks.energies[order_a[k]]
    ee = exact_sticks.energies[order_e[k]]
    print(f"  I={approx_sticks.intensities[order_a[k]]:.4f}  "
          f"E_approx={ea:9.2f}  E_exact={ee:9.2f}  shift={ea-ee:+7.2f}")

# the full cutoff sweep: successive broadened-spectrum L1 until convergence
result = converge_sweep(so2, varied_mode=0, fixed_cutoffs={1: 8},
                        threshold=1e-4, l_start=4, l_cap=24, route="ladder")
print("\ncutoff sweep on the displaced mode (successive L1):")
for l, d in result.trace:
    print(f"  L_max={l:2d}: {d:.3e}")
print(f"converged at L_max* = {result.converged_l_max}")
