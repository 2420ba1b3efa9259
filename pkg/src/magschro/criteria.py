"""Hypothesis diagnostics for the three essential self-adjointness criteria.

Criterion 1: constant vertex weight and a potential bounded below.
Criterion 2: ``m_n a_n / n^2 -> 0`` plus a semibounded form.
Criterion 3: bounded degree, complete weighted metric, semibounded form.

Limits and completeness are properties of infinite graphs.  For the built-in
families they are decided from closed forms; for anything else the report
gives the finite evidence and the status ``undecidable-at-truncation``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg
from scipy.sparse import linalg as splinalg

from .exceptions import EigensolverError, TruncationError
from .families import Family
from .graph import MagneticGraph, ball, hop_distances
from .metric import completeness_profile
from .operators import assemble

HOLDS = "holds"
FAILS = "fails"
UNDECIDABLE = "undecidable-at-truncation"

DENSE_LIMIT = 500
RESIDUAL_TOL = 1e-9
DESK_SCALE = 10_000


# -- spectra -----------------------------------------------------------------


def _eigsh_smallest(S, k):
    n = S.shape[0]
    # fixed seed keeps the result reproducible; a constant start can be degenerate
    rng = np.random.default_rng(0)
    v0 = rng.normal(size=n) + 1j * rng.normal(size=n)
    vals, vecs = splinalg.eigsh(S, k=k, which="SA", v0=v0, tol=1e-12,
                                maxiter=max(5000, 50 * n))
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def spectrum_of(op, k: int = 1, return_vectors=False):
    """``k`` smallest eigenvalues of the symmetrized truncation, residual-checked."""
    S = op.symmetric
    if S is None:
        raise ValueError("operator was assembled without symmetrization")
    n = S.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}]")
    if n < DENSE_LIMIT or k >= n - 1:
        vals, vecs = scipy.linalg.eigh(S.toarray(), subset_by_index=[0, k - 1])
    else:
        try:
            vals, vecs = _eigsh_smallest(S, k)
        except (splinalg.ArpackNoConvergence, splinalg.ArpackError) as exc:
            raise EigensolverError("Lanczos iteration did not converge",
                                   residual=float("nan")) from exc
    res = np.linalg.norm(S @ vecs - vecs * vals, axis=0)
    scale = np.linalg.norm(vecs, axis=0)
    worst = float(np.max(res / scale))
    if worst > RESIDUAL_TOL * max(1.0, float(np.max(np.abs(vals)))):
        raise EigensolverError(f"eigenpair residual {worst:.3e} exceeds tolerance", worst)
    vals = np.asarray(vals, dtype=float)
    return (vals, vecs) if return_vectors else vals


def spectrum(g: MagneticGraph, b, k: int = 1) -> np.ndarray:
    return spectrum_of(assemble(g, b, symmetrize=True), k)


# -- form lower bound ----------------------------------------------------------


@dataclass
class FormBoundEstimate:
    radii: list = field(default_factory=list)
    lambda_min: list = field(default_factory=list)
    monotone: bool = True

    @property
    def C_est(self) -> float:
        return max(0.0, -self.lambda_min[-1]) if self.lambda_min else 0.0

    def records(self):
        return [{"n": n, "lambda_min": lam} for n, lam in zip(self.radii, self.lambda_min)]


def form_bound(g: MagneticGraph, x0=None, radii=(1,)) -> FormBoundEstimate:
    """Smallest eigenvalue of the Dirichlet truncation on each ball."""
    radii = list(radii)
    if radii != sorted(radii):
        raise ValueError("radii must be ascending")
    x0 = g.root if x0 is None else x0
    est = FormBoundEstimate()
    for n in radii:
        b = ball(g, x0, n)
        if len(b) > DESK_SCALE:
            raise ValueError(f"ball of radius {n} has {len(b)} vertices (> {DESK_SCALE})")
        lam = float(spectrum(g, b, 1)[0])
        est.radii.append(int(n))
        est.lambda_min.append(lam)
    est.monotone = all(b <= a + 1e-10 for a, b in zip(est.lambda_min, est.lambda_min[1:]))
    return est


# -- Assumption (A) ------------------------------------------------------------


@dataclass
class AssumptionASequence:
    center: int
    n: list = field(default_factory=list)
    m: list = field(default_factory=list)
    a: list = field(default_factory=list)
    ratio: list = field(default_factory=list)
    exact: bool = False
    # m_n when only edges inside B_n are counted, where it differs
    m_in_ball: list = field(default_factory=list)

    def records(self):
        out = []
        for i, n in enumerate(self.n):
            rec = {"n": n, "m_n": self.m[i], "a_n": float(self.a[i]),
                   "ratio": float(self.ratio[i])}
            if self.exact:
                rec["a_n_exact"] = str(self.a[i])
                rec["ratio_exact"] = str(self.ratio[i])
            if self.m_in_ball and self.m_in_ball[i] != self.m[i]:
                rec["m_n_in_ball"] = self.m_in_ball[i]
            out.append(rec)
        return out


def _ratio(m, a, n):
    if n == 0:
        return math.inf
    if isinstance(a, Fraction):
        return Fraction(m) * a / (n * n)
    return m * a / (n * n)


def _assumption_a_family(fam: Family, max_n: int) -> AssumptionASequence:
    seq = AssumptionASequence(center=0)
    m = 0
    a = None
    for n in range(max_n + 1):
        # inside B_n only layer n can lose edges (those pointing to layer n+1)
        m_ball = max(m, fam.layer_inward_degree(n))
        m = max(m, fam.layer_degree(n))
        layer_a = fam.layer_a_over_w(n)
        a = layer_a if a is None else max(a, layer_a)
        if n > 0:
            seq.n.append(n)
            seq.m.append(m)
            seq.a.append(a)
            seq.ratio.append(_ratio(m, a, n))
            seq.m_in_ball.append(m_ball)
    seq.exact = all(isinstance(v, Fraction) for v in seq.a)
    return seq


def _assumption_a_graph(g: MagneticGraph, x0, max_n: int) -> AssumptionASequence:
    i0 = g.vertex_index(x0)
    r = hop_distances(g, i0)
    if g.truncation_radius is not None and max_n + 1 > g.truncation_radius:
        raise TruncationError(
            f"need truncation radius >= {max_n + 1} for m_n, a_n up to n={max_n}; "
            f"graph has {g.truncation_radius}")
    exact = g.w_exact is not None and g.a_exact is not None
    n_v = g.n_vertices
    best = [Fraction(0)] * n_v if exact else np.zeros(n_v)
    if exact:
        for k in range(g.n_edges):
            x, y = int(g.origin[k]), int(g.terminus[k])
            for z in (x, y):
                val = g.a_exact[k] / g.w_exact[z]
                if val > best[z]:
                    best[z] = val
    else:
        ratio_o = g.a / g.w[g.origin]
        ratio_t = g.a / g.w[g.terminus]
        np.maximum.at(best, g.origin, ratio_o)
        np.maximum.at(best, g.terminus, ratio_t)
    # degree counting only edges with both ends at hop distance <= r(x) (ball-internal view)
    inward = np.zeros(n_v, dtype=np.int64)
    ok = r[g.terminus] <= r[g.origin]
    np.add.at(inward, g.origin[ok], 1)
    ok = r[g.origin] <= r[g.terminus]
    np.add.at(inward, g.terminus[ok], 1)

    top = int(r.max())
    seq = AssumptionASequence(center=i0, exact=exact)
    m = 0
    a = Fraction(0) if exact else 0.0
    m_ball_prev = 0
    for n in range(max_n + 1):
        layer = np.flatnonzero(r == n)
        if layer.size:
            m = max(m, int(g.degrees[layer].max()))
            a = max(a, max(best[i] for i in layer)) if exact else max(a, float(best[layer].max()))
            prev = np.flatnonzero(r == n - 1)
            m_ball = max(m_ball_prev, int(g.degrees[prev].max()) if prev.size else 0,
                         int(inward[layer].max()))
            m_ball_prev = m_ball
        elif n > top:
            m_ball = m
        if n > 0:
            seq.n.append(n)
            seq.m.append(m)
            seq.a.append(a)
            seq.ratio.append(_ratio(m, a, n))
            seq.m_in_ball.append(m_ball)
    return seq


def assumption_a(source, x0=None, max_n: int = 10, materialize: bool = False) -> AssumptionASequence:
    """``m_n``, ``a_n`` and ``m_n a_n / n^2`` for ``n = 1..max_n``.

    Degrees are full degrees and ``a_n`` ranges over every edge at a vertex
    of ``B_n``, including edges that leave the ball.  For a family the
    closed-form layer data is used unless ``materialize`` asks for a
    truncation of radius ``max_n + 1``.
    """
    if isinstance(source, Family):
        if source.layer_degree(0) is not None and not materialize:
            return _assumption_a_family(source, max_n)
        g = source.generate(max_n + 1) if source.infinite else source.generate(1)
        return _assumption_a_graph(g, g.root if x0 is None else x0, max_n)
    g = source
    return _assumption_a_graph(g, g.root if x0 is None else x0, max_n)


def fit_power_law(ns, values, tail: float = 0.5):
    """Least-squares ``values ~ c n^p`` over the last ``tail`` fraction of points."""
    ns = np.asarray(ns, dtype=float)
    vals = np.asarray(values, dtype=float)
    sel = (ns > 0) & (vals > 0)
    ns, vals = ns[sel], vals[sel]
    if len(ns) < 2:
        return None
    start = int(len(ns) * (1 - tail))
    start = min(start, len(ns) - 2)
    X = np.log(ns[start:])
    Y = np.log(vals[start:])
    p, logc = np.polyfit(X, Y, 1)
    return {"exponent": float(p), "coefficient": float(math.exp(logc)),
            "points": int(len(X))}


# -- bounded degree ------------------------------------------------------------


def bounded_degree(source, probe_radius: int = 10) -> dict:
    """Degree bound ``N``: exact from a family formula, or from a finite graph."""
    if isinstance(source, Family):
        N, exact = source.bounded_degree()
        if exact:
            return {"N": N, "exact": True, "bounded": N is not None}
        g = source.generate(probe_radius + 1) if source.infinite else source.generate(1)
    else:
        g = source
    N = int(g.degrees.max())
    if g.truncation_radius is None:
        return {"N": N, "exact": True, "bounded": True}
    b = ball(g, g.root, min(probe_radius, g.truncation_radius - 1))
    N = int(g.degrees[b.vertices].max())
    return {"N": N, "exact": False, "bounded": None, "note": "lower bound only"}


# -- theorem report --------------------------------------------------------------


def _hyp(name, status, **evidence):
    return {"name": name, "status": status, "evidence": evidence}


def _theorem(hypotheses):
    return {"hypotheses": hypotheses,
            "applicable": all(h["status"] == HOLDS for h in hypotheses)}


def _form_radii(g, max_n):
    radii = []
    for n in (1, 2, 5, 10, 20, 40, 80, 160):
        if n > max_n:
            break
        if g.truncation_radius is not None and n + 1 > g.truncation_radius:
            break
        if len(ball(g, g.root, n)) > DESK_SCALE:
            break
        radii.append(n)
    return radii or [0]


def theorem_report(source, x0=None, max_n: int = 20, profile_max_n: int | None = None,
                   form_max_n: int | None = None, margin: int = 1) -> dict:
    """Per-criterion hypothesis status with the supporting sequences."""
    fam = source if isinstance(source, Family) else None
    # a stored truncation stands for its infinite family, not for a finite graph
    finite = (not fam.infinite) if fam is not None else source.truncation_radius is None
    profile_max_n = min(max_n, 60) if profile_max_n is None else profile_max_n
    form_max_n = min(max_n, 40) if form_max_n is None else form_max_n

    if fam is not None and fam.infinite:
        g_form = fam.generate(form_max_n + 1)
    elif fam is not None:
        g_form = fam.generate(1)
    else:
        g_form = source
    if x0 is not None and g_form.vertex_index(x0) != g_form.root:
        if fam is not None and fam.infinite:
            raise ValueError("family reports are centred at the family root")
        g_form = g_form.replace(root=g_form.vertex_index(x0))

    seq = assumption_a(fam if fam is not None else g_form, None, max_n)
    if finite:
        fb = form_bound(g_form, None, [int(hop_distances(g_form, g_form.root).max())])
    else:
        fb = form_bound(g_form, None, _form_radii(g_form, form_max_n))
    prof = completeness_profile(fam if fam is not None else g_form, None,
                                profile_max_n, margin)
    deg = bounded_degree(fam if fam is not None else g_form, probe_radius=max_n)

    # vertex weight and potential
    if fam is not None and fam.weight_constant() is not None:
        w_const = fam.weight_constant()
        w_status = HOLDS if w_const else FAILS
        w_ev = {"source": "family formula", "constant": w_const}
    else:
        w_const = bool(np.all(g_form.w == g_form.w[0]))
        w_status = HOLDS if w_const else FAILS
        w_ev = {"source": "stored graph", "constant": w_const,
                "w_min": float(g_form.w.min()), "w_max": float(g_form.w.max())}
    if fam is not None and fam.q_lower_bound() is not None:
        q_inf = fam.q_lower_bound()
        q_ev = {"source": "family formula", "inf_q": q_inf}
    else:
        q_inf = float(g_form.q.min())
        q_ev = {"source": "stored graph", "inf_q": q_inf}
    q_status = HOLDS if (finite or (fam is not None and fam.q_lower_bound() is not None)) \
        else UNDECIDABLE

    # semibounded form: Delta_sigma >= 0, so q >= -C gives (Hu,u) >= -C ||u||^2
    lam_ok = fb.monotone
    if fam is not None and fam.q_lower_bound() is not None:
        C = max(0.0, -fam.q_lower_bound())
        sb_status = HOLDS
        sb_ev = {"source": "nonnegative magnetic form + q >= -C", "C": C,
                 "lambda_min": fb.records(), "consistent": bool(
                     all(lam >= -C - 1e-10 for lam in fb.lambda_min) and lam_ok)}
    elif finite:
        sb_status = HOLDS
        sb_ev = {"source": "finite graph", "C_est": fb.C_est, "lambda_min": fb.records()}
    else:
        sb_status = UNDECIDABLE
        sb_ev = {"C_est": fb.C_est, "lambda_min": fb.records()}

    trend = fit_power_law(seq.n, seq.ratio)
    limit = fam.assumption_a_limit() if fam is not None else None
    if limit is not None:
        aa_status = HOLDS if limit == 0 else FAILS
        aa_ev = {"source": "closed form", "limit": str(limit),
                 "last_ratio": float(seq.ratio[-1]), "trend": trend}
    elif finite:
        aa_status = HOLDS
        aa_ev = {"source": "finite graph: m_n, a_n are eventually constant",
                 "last_ratio": float(seq.ratio[-1]), "trend": trend}
    else:
        aa_status = UNDECIDABLE
        aa_ev = {"last_ratio": float(seq.ratio[-1]), "trend": trend}

    if deg["exact"]:
        bd_status = HOLDS if deg["bounded"] else FAILS
    else:
        bd_status = UNDECIDABLE
    if fam is not None and fam.infinite:
        complete, why = fam.completeness()
        cm_status = HOLDS if complete else UNDECIDABLE
        cm_ev = {"source": "closed form", "argument": why,
                 "profile_last": prof.min_dist[-1] if prof.min_dist else None}
    elif finite:
        cm_status = HOLDS
        cm_ev = {"source": "finite metric spaces are complete"}
    else:
        cm_status = UNDECIDABLE
        cm_ev = {"profile_last": prof.min_dist[-1] if prof.min_dist else None}

    theorems = {
        "1": _theorem([
            _hyp("vertex weight constant", w_status, **w_ev),
            _hyp("potential bounded below", q_status, **q_ev),
        ]),
        "2": _theorem([
            _hyp("assumption A: m_n a_n / n^2 -> 0", aa_status, **aa_ev),
            _hyp("form semibounded below", sb_status, **sb_ev),
        ]),
        "3": _theorem([
            _hyp("bounded degree", bd_status, **deg),
            _hyp("metric d_wa complete", cm_status, **cm_ev),
            _hyp("form semibounded below", sb_status, **sb_ev),
        ]),
    }
    if finite:
        for th in theorems.values():
            th["trivially_applicable"] = True

    report = {
        "source": ({"family": fam.name, "params": _plain(fam.params)} if fam is not None
                   else {}),
        "graph_hash": g_form.content_hash(),
        "center": g_form.ids[g_form.root],
        "finite_graph": finite,
        "max_n": max_n,
        "assumption_a": seq.records(),
        "assumption_a_exact": seq.exact,
        "form_bound": fb.records(),
        "form_bound_monotone": fb.monotone,
        "metric_profile": prof.records(),
        "metric_profile_closed_form": prof.closed_form,
        "metric_profile_note": prof.note,
        "theorems": theorems,
    }
    if finite:
        report["notice"] = ("finite graph: H is a Hermitian matrix on a finite-dimensional "
                            "space, so every criterion applies trivially")
    ref = fam.reference_classification() if fam is not None else None
    if ref is not None:
        got = {k: th["applicable"] for k, th in theorems.items()}
        report["reference_classification"] = ref
        report["matches_reference"] = got == ref
    return report


def _plain(params):
    out = {}
    for k, v in params.items():
        out[k] = list(v) if isinstance(v, tuple) else v
    return out
