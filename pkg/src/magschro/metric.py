"""Weighted path metric d_wa, metric balls and the two cut-off families."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .exceptions import TruncationError
from .graph import MagneticGraph, hop_distances

STABILITY_TOL = 1e-9


def edge_lengths(g: MagneticGraph) -> np.ndarray:
    """``sqrt(min(w(o), w(t)) / a(e))`` for every stored edge."""
    wmin = np.minimum(g.w[g.origin], g.w[g.terminus])
    return np.sqrt(wmin / g.a)


def edge_length(g: MagneticGraph, x, y) -> float:
    k, _ = g.edge_index(x, y)
    return float(edge_lengths(g)[k])


def _length_matrix(g: MagneticGraph, keep=None) -> sparse.csr_matrix:
    L = edge_lengths(g)
    o, t = g.origin, g.terminus
    if keep is not None:
        sel = keep[o] & keep[t]
        o, t, L = o[sel], t[sel], L[sel]
    n = g.n_vertices
    return sparse.csr_matrix((np.concatenate([L, L]), (np.concatenate([o, t]),
                                                        np.concatenate([t, o]))),
                             shape=(n, n))


def distances_from(g: MagneticGraph, sources, keep=None) -> np.ndarray:
    """Distance to the nearest of ``sources`` (multi-source Dijkstra).

    ``keep`` restricts paths to a vertex subset; unreachable vertices get
    ``inf``.
    """
    src = np.atleast_1d([g.vertex_index(s) for s in np.atleast_1d(sources)])
    if src.size == 0:
        return np.full(g.n_vertices, np.inf)
    return csgraph.dijkstra(_length_matrix(g, keep), directed=False,
                            indices=src, min_only=True)


def dist(g: MagneticGraph, x, y) -> float:
    """``d_wa(x, y)`` within the stored graph."""
    d = distances_from(g, [x])[g.vertex_index(y)]
    if not np.isfinite(d):
        raise ValueError(f"{y!r} is unreachable from {x!r}")
    return float(d)


def metric_ball(g: MagneticGraph, x0, R: float) -> np.ndarray:
    """Vertex indices of ``U_R = {x : d_wa(x0, x) <= R}``."""
    if R < 0:
        raise ValueError("R must be nonnegative")
    return np.flatnonzero(distances_from(g, [x0]) <= R)


@dataclass
class CutoffFamily:
    kind: str
    parameter: float
    values: np.ndarray
    center: int
    # auxiliary data for property checks
    hops: np.ndarray | None = None
    distances: np.ndarray | None = None


def phi_n(g: MagneticGraph, x0, n: int) -> CutoffFamily:
    """Combinatorial cut-off ``((2n - r(x))/n v 0) ^ 1``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    i0 = g.vertex_index(x0)
    r = g.hops_from_root if i0 == g.root else hop_distances(g, i0)
    vals = np.clip((2 * n - r) / n, 0.0, 1.0)
    return CutoffFamily("phi_n", n, vals, i0, hops=r)


def psi_R(g: MagneticGraph, x0, R: float) -> CutoffFamily:
    """Lipschitz cut-off ``min(1, d_wa(x, V \\ U_{R+1}))``.

    On a truncation the outer hop sphere counts as part of the complement,
    which can only lower the values.
    """
    if R < 0:
        raise ValueError("R must be nonnegative")
    i0 = g.vertex_index(x0)
    d0 = distances_from(g, [i0])
    outside = d0 > R + 1
    if g.truncation_radius is not None:
        edge = hop_distances(g, i0) >= g.truncation_radius
        if np.any(edge & ~outside):
            raise TruncationError(
                f"U_(R+1) with R={R} reaches the truncation boundary "
                f"(radius {g.truncation_radius}); enlarge the truncation")
        outside = outside | edge
    if not outside.any():
        raise TruncationError(f"V \\ U_(R+1) is empty in the stored graph for R={R}")
    dc = distances_from(g, np.flatnonzero(outside))
    vals = np.minimum(1.0, dc)
    return CutoffFamily("psi_R", R, vals, i0, distances=d0)


def check_phi_properties(g: MagneticGraph, cut: CutoffFamily) -> dict:
    """Range, plateau/support and ``|d phi| <= 1/n`` (exact integer test)."""
    n = int(cut.parameter)
    r, v = cut.hops, cut.values
    in_range = bool(np.all((v >= 0) & (v <= 1)))
    plateau = bool(np.all(v[r <= n] == 1.0))
    vanish = bool(np.all(v[r > 2 * n] == 0.0))
    # phi = num/n with integer num = clip(2n - r, 0, n)
    num = np.clip(2 * n - r, 0, n)
    exact_values = bool(np.all(v == num / n))
    jump = np.abs(num[g.terminus] - num[g.origin])
    grad_ok = bool(np.all(jump <= 1))
    return {
        "range": in_range,
        "one_on_B_n": plateau,
        "zero_off_B_2n": vanish,
        "values_exact": exact_values,
        "gradient_bound": grad_ok,
        "max_gradient": float(jump.max() / n) if jump.size else 0.0,
    }


def check_psi_properties(g: MagneticGraph, cut: CutoffFamily, pairwise=True,
                         tol=1e-12) -> dict:
    """Properties (i)-(v) of the Lipschitz cut-off, all pairs if ``pairwise``."""
    R, v, d0 = cut.parameter, cut.values, cut.distances
    inside = d0 <= R
    inside_next = d0 <= R + 1
    out = {
        "one_on_U_R": bool(np.all(v[inside] == 1.0)),
        "zero_off_U_R1": bool(np.all(v[~inside_next] == 0.0)),
        "range": bool(np.all((v >= 0) & (v <= 1))),
        "finite_support": bool(np.all(inside_next[v != 0])),
    }
    if pairwise:
        D = csgraph.dijkstra(_length_matrix(g), directed=False)
        gap = np.abs(v[:, None] - v[None, :]) - D
        out["max_lipschitz_excess"] = float(gap.max())
        out["lipschitz"] = bool(gap.max() <= tol)
    else:
        L = edge_lengths(g)
        gap = np.abs(v[g.terminus] - v[g.origin]) - L
        out["max_lipschitz_excess"] = float(gap.max()) if gap.size else 0.0
        out["lipschitz"] = bool(out["max_lipschitz_excess"] <= tol)
    return out


@dataclass
class MetricProfile:
    """Per-radius extent of combinatorial spheres in the weighted metric."""

    center: int
    margin: int
    n: list = field(default_factory=list)
    min_dist: list = field(default_factory=list)
    max_dist: list = field(default_factory=list)
    stabilized: list = field(default_factory=list)
    closed_form: list | None = None
    note: str = ("finite truncations only bound the infinite-graph metric from above; "
                 "a diverging profile is evidence of completeness, not a proof")

    def records(self):
        return [
            {"n": n, "min_dist": lo, "max_dist": hi, "margin": self.margin,
             "stabilized": st}
            for n, lo, hi, st in zip(self.n, self.min_dist, self.max_dist, self.stabilized)
        ]


def completeness_profile(source, x0=None, max_n: int = 10, margin: int = 1) -> MetricProfile:
    """Sphere distances ``min/max_{r(x)=n} d_wa(x0, x)`` for ``n <= max_n``.

    ``source`` is a :class:`~magschro.families.Family` (the ball of radius
    ``n + margin`` is its truncation) or a finite graph.  Every value is
    recomputed with ``margin + 2`` and flagged when the two disagree by more
    than ``STABILITY_TOL``.
    """
    from .families import Family

    if margin < 1:
        raise ValueError("margin must be >= 1")
    if isinstance(source, Family):
        if not source.infinite:
            g = source.generate(1)
        else:
            g = source.generate(max_n + margin + 2)
        closed = source.sphere_distance(0) is not None
    else:
        g = source
        closed = False
    i0 = g.root if x0 is None else g.vertex_index(x0)
    if isinstance(source, Family) and source.infinite and i0 != g.root:
        raise ValueError("family profiles are centred at the family root")
    r = hop_distances(g, i0)
    prof = MetricProfile(center=i0, margin=margin)
    for n in range(max_n + 1):
        sphere = r == n
        if not sphere.any():
            break
        d1 = distances_from(g, [i0], keep=r <= n + margin)[sphere]
        d2 = distances_from(g, [i0], keep=r <= n + margin + 2)[sphere]
        prof.n.append(n)
        prof.min_dist.append(float(d1.min()))
        prof.max_dist.append(float(d1.max()))
        stable = (abs(d1.min() - d2.min()) <= STABILITY_TOL
                  and abs(d1.max() - d2.max()) <= STABILITY_TOL)
        prof.stabilized.append(bool(stable))
    if closed:
        prof.closed_form = [source.sphere_distance(n) for n in prof.n]
    return prof
