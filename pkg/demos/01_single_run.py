"""
Teleporting one qubit through a GHZ resource
=============================================

Walks one input state through both measurement stages and shows the eight
branches with their probabilities and output fidelities.
"""

# %%
import math

import numpy as np

from teleport3 import (
    BlochAngles,
    TABLE_GHZ_P0,
    bell_projectors,
    ghz_state,
    input_state,
    measure,
    run_p0,
    tensor,
)

a = BlochAngles(theta=1.1, phi=0.4)
joint = tensor(input_state(a, 1), ghz_state())
print("register labels:", joint.labels)

# %%
# Alice's Bell measurement on qubits 1 and 2.  With GHZ every outcome is
# equally likely whatever the input.
for branch in measure(joint, bell_projectors(), on=(1, 2)):
    print(branch.outcome, round(branch.probability, 12), branch.conditional.labels)

# %%
# The full protocol: Cindy measures qubit 3 in the nu basis, Bob corrects.
for nu in (0.0, math.pi / 8, math.pi / 4):
    recs = run_p0(ghz_state(), a, nu, TABLE_GHZ_P0)
    fids = np.array([r.fidelity for r in recs])
    probs = np.array([r.branch_probability for r in recs])
    print(f"nu={nu:.4f}  mean fidelity {probs @ fids:.6f}  min branch {fids.min():.6f}")
