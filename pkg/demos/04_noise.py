"""
White noise on the resource
===========================

Mixing the resource with the maximally mixed state lowers both averages
linearly in the visibility w.  For GHZ the slope depends on nu.
"""

# %%
import math

from teleport3 import affine_fit, noise_sweep

ws = [0.0, 0.25, 0.5, 0.75, 1.0]
for kind, nu in (("w", 0.3), ("ghz", 0.0), ("ghz", math.pi / 8), ("ghz", math.pi / 4)):
    reps = noise_sweep(kind, nu, ws)
    slope, intercept, resid = affine_fit(ws, [r.simulated for r in reps])
    print(f"{kind:3s} nu={nu:.4f}  slope {slope:.6f}  intercept {intercept:.6f}  residual {resid:.1e}")

# %%
# Below w = 1/3 (GHZ, nu = pi/4) teleportation is no better than guessing classically.
for rep in noise_sweep("ghz", math.pi / 4, [0.2, 1 / 3, 0.5]):
    print(rep.params["w"], round(rep.simulated, 9))
