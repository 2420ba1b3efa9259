"""
The triangular graph
====================

Row k holds k vertices, each joined to all k+1 vertices of row k+1.  Edge
weights are 1 and a vertex in row k has w = k^(-1/2).  Degrees are
unbounded but a/w grows only like a square root.
"""

import math

import numpy as np

from magschro import assumption_a, ball, completeness_profile, gen_family, make_family
from magschro import theorem_report

fam = make_family("triangular")

# %%
# Balls grow quadratically
# ------------------------

g = gen_family("triangular", {}, 12)
print([len(ball(g, "x0", n)) for n in range(6)])  # n(n+3)/2 + 1

# %%
# m_n a_n / n^2 tends to zero
# ---------------------------
# m_n = 2n + 2 and a_n = sqrt(n + 1), so the ratio decays like 2/sqrt(n).
# The decay is slow: at n = 200 it is still about 0.14.

seq = assumption_a(fam, max_n=2000)
r = np.array(seq.ratio)
for n in (3, 10, 200, 1603, 2000):
    print(f"n={n:>5}  ratio={r[n - 1]:.6f}  2/sqrt(n)={2 / math.sqrt(n):.6f}")

# %%
# Distance to row n
# -----------------
# Every path to row n+1 crosses each row transition once, and crossing from
# row k to row k+1 costs (k+1)^(-1/4).

prof = completeness_profile(fam, max_n=20)
print([round(d, 6) for d in prof.min_dist[:6]])
print([round(d, 6) for d in prof.closed_form[:6]])

# %%
# Criteria
# --------

rep = theorem_report(fam, max_n=200)
print({k: th["applicable"] for k, th in rep["theorems"].items()})
