"""
Flux through a cycle
====================

On an n-cycle only the total flux, the product of the phases around the
loop, is visible to the spectrum.  Local phase changes are a gauge.
"""

import math

import numpy as np

from magschro import ball, gen_family, spectrum

# %%
# Spectrum against flux
# ---------------------
# With unit weights the eigenvalues are 2 - 2 cos((flux + 2 pi k)/n).

for flux in (0.0, math.pi / 3, math.pi):
    g = gen_family("cycle", {"n": 3, "flux": flux})
    vals = spectrum(g, ball(g, "0", 1), k=3)
    exact = sorted(2 - 2 * math.cos((flux + 2 * math.pi * k) / 3) for k in range(3))
    print(f"flux={flux:.4f}  {np.round(vals, 12)}  closed form {np.round(exact, 12)}")

# %%
# Gauge invariance
# ----------------
# Multiply the phase of [x, y] by conj(U(x)) U(y) for any unimodular U.  The
# flux around every loop is unchanged and so is the spectrum.

g = gen_family("random", {"n": 30, "p": 0.15, "seed": 4})
U = np.exp(1j * np.random.default_rng(0).uniform(0, 2 * np.pi, g.n_vertices))
gauged = g.replace(sigma=g.sigma * np.conj(U[g.origin]) * U[g.terminus])
b = ball(g, g.root, 30)
print(np.max(np.abs(spectrum(g, b, 30) - spectrum(gauged, b, 30))))

# %%
# Flux lifts the bottom of the spectrum
# -------------------------------------
# Without flux the constant function has energy 0.  With flux pi on a
# 3-cycle no function can be constant in the twisted sense.

for flux in np.linspace(0, math.pi, 5):
    g = gen_family("cycle", {"n": 3, "flux": flux})
    print(f"flux={flux:.3f}  lambda_min={spectrum(g, ball(g, '0', 1), 1)[0]:.6f}")
