"""
Cut-off functions and energy bounds
===================================

For a solution of Hu = 0 on a region, the energy of u times a cut-off
depends only on how fast the cut-off changes.  Two cut-offs are compared:
one built from hop distance and one from the weighted metric.
"""

import numpy as np

from magschro import MagneticGraph, gen_family, hop_distances
from magschro.identities import (check_cutoff_energy_bound, check_ground_form_identity,
                                 check_psi_energy_bound, harmonic_extension,
                                 shift_to_coercive)

# %%
# A harmonic extension on the half-line
# -------------------------------------
# Fix u at the far end of a truncation and solve Hu = 0 inside.  The
# potential is shifted so that the interior block is at least the identity.

g = gen_family("halfline", {}, 30)
interior = np.flatnonzero(hop_distances(g, "0") < 30)
gs = shift_to_coercive(g, interior)
ext = harmonic_extension(gs, interior, {"30": 1.0 + 0.5j})
print("relative residual", ext.relative_residual)

# %%
# The form of u phi is an edge sum
# --------------------------------
# (H(u phi), u phi) only sees the differences of phi along edges.

phi = np.zeros(gs.n_vertices)
phi[:20] = np.linspace(1, 0.05, 20)
res = check_ground_form_identity(gs, ext, phi)
print(res.name, res.passed, f"{res.max_violation:.1e}")

# %%
# Hop-distance cut-off
# --------------------
# phi_n is 1 on the ball of radius n, 0 beyond 2n, and drops by 1/n per hop.

for n in (2, 5, 10):
    res = check_cutoff_energy_bound(gs, ext, n)
    print(f"n={n:>2}", res.passed, {k: f"{v:.3g}" for k, v in res.details["slack"].items()})

# %%
# Metric cut-off, and where restricting to a shell fails
# ------------------------------------------------------
# psi_R is 1 on U_R, 0 outside U_(R+1) and 1-Lipschitz.  Bounding the energy
# by a sum over the shell U_(R+1) minus U_R misses edges that leave U_R or
# enter the outside, and psi changes along those too.  Three vertices with
# w = 4 and a = 1 make every edge of length 2, so the shell can be empty
# while the energy is not.

tiny = MagneticGraph.build(ids="012", w=[4, 4, 4], q=[0, 0, 0], origin=[0, 1],
                           terminus=[1, 2], a=[1, 1])
ts = shift_to_coercive(tiny, [0])
text = harmonic_extension(ts, [0], {"1": 1.0})
for shell in ("metric", "active"):
    res = check_psi_energy_bound(ts, text, 0.5, shell=shell)
    print(shell, res.passed, "set size", res.details["set_size"],
          "energy", f"{res.details['(H(u psi),u psi)']:.3f}",
          "bound", f"{res.details['S_edge_sum']:.3f}")
