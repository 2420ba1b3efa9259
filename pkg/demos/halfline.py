"""
The weighted half-line
======================

Vertices 0, 1, 2, ... on a path.  The edge [n-1, n] carries a = n and the
vertex n-1 carries w = 1/n, so a/w grows quadratically along the line.
"""

import math

from magschro import assumption_a, completeness_profile, make_family, theorem_report

fam = make_family("halfline")

# %%
# Growth of m_n a_n / n^2
# -----------------------
# Degrees never exceed 2 while a_n = (n+1)^2 exactly, so the ratio settles
# at 2 instead of going to zero.

seq = assumption_a(fam, max_n=1000)
for rec in seq.records()[:3] + seq.records()[-1:]:
    print(f"n={rec['n']:>5}  m_n={rec['m_n']}  a_n={rec['a_n_exact']:>8}  ratio={rec['ratio']:.6f}")

# %%
# The weighted path metric
# ------------------------
# Each edge has length sqrt(min(w)/a) = 1/sqrt((n+1)(n+2)).  The sum behaves
# like a harmonic series, so the distance to the n-th vertex grows without
# bound, only slowly.

prof = completeness_profile(fam, max_n=60)
for n in (1, 2, 10, 60):
    print(f"d(0, {n:>2}) = {prof.min_dist[n]:.12f}")
print("d(0, 2) closed form:", 1 / math.sqrt(2) + 1 / math.sqrt(6))

# %%
# Which criteria apply
# --------------------

rep = theorem_report(fam, max_n=200)
for k, th in rep["theorems"].items():
    status = ", ".join(f"{h['name']}: {h['status']}" for h in th["hypotheses"])
    print(f"criterion {k}: {'applies' if th['applicable'] else 'does not apply'} ({status})")
