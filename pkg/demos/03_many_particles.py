"""
Direct teleportation with larger W resources
============================================

P1 skips the accomplice's measurement.  The average drops with the number of
particles and reaches the classical 2/3 at four.
"""

# %%
from teleport3 import n_sweep, p1_report, p1_w_model, theta_profile

for rep in n_sweep(range(3, 11)):
    n = rep.params["n"]
    flag = "<= 2/3" if rep.simulated <= 2 / 3 + 1e-12 else ""
    print(f"N={n:2d}  {rep.simulated:.9f}  closed {rep.oracle:.9f} {flag}")

# %%
# Three particles: either of the two other holders can receive the state.
for receiver in (3, 4):
    print("receiver", receiver, p1_report("w", 3, receiver).simulated)

# %%
# Fidelity depends on latitude: best on the equator, worst at the poles.
print(theta_profile(p1_w_model(6, 7), [0.0, 0.8, 1.5708, 2.3, 3.1416]))
