"""Load a bundled vibronic problem and inspect the mode transformation.

The SO2- -> SO2 photodetachment ships with the package: two coupled modes,
a small Duschinsky rotation, and a large displacement on the first mode.
"""

import numpy as np

from vibronic import bundled_problem, duschinsky_J, validate
from vibronic.problem import duschinsky_J_inv_T, orthogonalized_S

problem = bundled_problem("so2")
print(f"problem: {problem.label}")
print(f"initial-surface frequencies (cm^-1): {problem.omega_A}")
print(f"final-surface frequencies   (cm^-1): {problem.omega_B}")
print(f"displacement delta: {problem.delta}")

# literature tables are 4-decimal, so S is orthogonal only to ~1e-5;
# validation passes but records the measured deviation
report = validate(problem)
print()
print(report)

# the dimensionless transformation J = diag(sqrt(wB)) S diag(1/sqrt(wA))
# is built from the polar-projected (exactly orthogonal) S
j = duschinsky_J(problem)
print()
print("J =")
print(np.array_str(j, precision=4))
print("max |S_polar - S_table| =", np.abs(orthogonalized_S(problem) - problem.duschinsky_S).max())
print("J J^-T^T - I (should be ~1e-16):", np.abs(j @ duschinsky_J_inv_T(problem).T - np.eye(2)).max())
