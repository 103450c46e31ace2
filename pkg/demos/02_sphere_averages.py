"""
Average fidelities over the Bloch sphere
========================================

Quadrature averages for both resources next to their closed forms, then the
Monte Carlo estimate of the same numbers.
"""

# %%
import math

import numpy as np

from teleport3 import TABLE_W_P0, monte_carlo_average, oracle, p0_model, p0_report, w_state

for nu in np.linspace(0, math.pi / 2, 5):
    ghz = p0_report("ghz", nu)
    w = p0_report("w", nu)
    print(f"nu={nu:.4f}  GHZ {ghz.simulated:.9f} (closed {ghz.oracle:.9f})  W {w.simulated:.9f}")

# %%
# The W average does not depend on nu, but individual branches do.
print("W closed form:", oracle("w.average"))

# %%
model = p0_model(w_state(), math.pi / 8, TABLE_W_P0)
for seed in range(3):
    r = monte_carlo_average(model, 50_000, seed)
    print(f"seed {seed}: {r.mean:.5f} +- {r.stderr:.5f}")
