"""Machine checks of the operator identities and energy inequalities.

Every ``check_*`` function returns a :class:`CheckResult`.  Identities are
compared relative to the magnitude of their summands, so the violation is a
pure rounding measure; inequalities report the (relative) amount by which
the smaller side exceeds the larger one, and zero when they hold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse import linalg as splinalg

from .exceptions import SingularSystemError
from .graph import Ball, MagneticGraph, ball
from .metric import distances_from, phi_n, psi_R
from .operators import (assemble, d_sigma, delta_sigma, inner_e, inner_v,
                        laplacian_sigma, norm_v, physical_laplacian, schrodinger)

TOLERANCES = {
    "identity": 1e-12,   # exact algebraic identities
    "kato": 1e-12,       # pointwise slack in the Kato inequality
    "solve": 1e-10,      # anything passing through a linear solve
    "inequality": 1e-12, # energy inequalities (relative slack)
    "phase": 1e-12,      # | |sigma| - 1 |
}

_TINY = 1e-300


@dataclass
class CheckResult:
    name: str
    passed: bool
    max_violation: float
    tolerance: float
    location: str | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {"name": self.name, "passed": self.passed,
                "max_violation": self.max_violation, "tolerance": self.tolerance,
                "location": self.location, "details": self.details}


def _result(name, violation, tol, location=None, **details):
    violation = float(violation)
    return CheckResult(name, bool(violation <= tol), violation, tol, location, details)


def _pointwise(g, name, lhs, rhs, scale, tol):
    """Compare two vertex fields relative to ``max(scale)``."""
    diff = np.abs(np.asarray(lhs) - np.asarray(rhs))
    if diff.size == 0 or not diff.any():
        return _result(name, 0.0, tol)
    k = int(np.argmax(diff))
    viol = diff[k] / max(float(np.max(scale)), _TINY)
    return _result(name, viol, tol, location=g.ids[k])


def _scalar(name, lhs, rhs, scale, tol, **details):
    viol = abs(lhs - rhs) / max(scale, _TINY) if lhs != rhs else 0.0
    return _result(name, viol, tol, lhs=_num(lhs), rhs=_num(rhs), **details)


def _num(z):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def _abs_laplacian(g, u):
    """Pointwise magnitude bound for the Laplacian sums at each vertex."""
    o, t, a, _, _ = g.oriented
    mag = a * (np.abs(u[o]) + np.abs(u[t]))
    return np.bincount(o, weights=mag, minlength=g.n_vertices) / g.w


# -- operator identities --------------------------------------------------------


def check_adjointness(g, u, Y, tol=TOLERANCES["identity"]) -> CheckResult:
    """``(d_sigma u, Y) = (u, delta_sigma Y)``."""
    u, Y = np.asarray(u, dtype=complex), np.asarray(Y, dtype=complex)
    lhs = inner_e(g, d_sigma(g, u), Y)
    rhs = inner_v(g, u, delta_sigma(g, Y))
    scale = float(np.sum(g.a * (np.abs(u[g.terminus]) + np.abs(u[g.origin])) * np.abs(Y)))
    return _scalar("adjointness", lhs, rhs, scale, tol)


def check_factorization(g, u, tol=TOLERANCES["identity"]) -> CheckResult:
    """``delta_sigma d_sigma u = Delta_sigma u`` at every vertex."""
    u = np.asarray(u, dtype=complex)
    lhs = delta_sigma(g, d_sigma(g, u))
    rhs = laplacian_sigma(g, u)
    return _pointwise(g, "factorization", lhs, rhs, _abs_laplacian(g, u), tol)


def check_symmetry(g, u, v, tol=TOLERANCES["identity"]) -> CheckResult:
    """``(H u, v) = (u, H v)``."""
    u, v = np.asarray(u, dtype=complex), np.asarray(v, dtype=complex)
    lhs = inner_v(g, schrodinger(g, u), v)
    rhs = inner_v(g, u, schrodinger(g, v))
    scale = float(np.sum(g.w * (_abs_laplacian(g, u) + np.abs(g.q * u)) * np.abs(v))
                  + np.sum(g.w * np.abs(u) * (_abs_laplacian(g, v) + np.abs(g.q * v))))
    return _scalar("symmetry", lhs, rhs, scale, tol)


def check_form_nonnegative(g, u, tol=TOLERANCES["identity"]) -> CheckResult:
    """``(Delta_sigma u, u) = (d_sigma u, d_sigma u) >= 0``."""
    u = np.asarray(u, dtype=complex)
    lhs = inner_v(g, laplacian_sigma(g, u), u)
    du = d_sigma(g, u)
    rhs = inner_e(g, du, du)
    scale = float(np.sum(g.w * _abs_laplacian(g, u) * np.abs(u)))
    res = _scalar("form_nonnegative", lhs, rhs, scale, tol)
    if rhs.real < -tol * max(scale, _TINY):
        res.passed = False
    return res


def check_realness(g, v, tol=TOLERANCES["identity"]) -> CheckResult:
    """``|Im (H v, v)| <= tol |(H v, v)|``."""
    v = np.asarray(v, dtype=complex)
    val = inner_v(g, schrodinger(g, v), v)
    viol = abs(val.imag) / max(abs(val), _TINY) if val.imag else 0.0
    return _result("realness", viol, tol, value=_num(val))


def check_hermitian(op, tol=TOLERANCES["identity"]) -> CheckResult:
    """``w(x) M[x,y] = conj(w(y) M[y,x])`` and ``S = S^H``."""
    M = op.matrix.toarray()
    W = op.weights[:, None] * M
    diff = np.abs(W - W.conj().T)
    scale = max(float(np.abs(W).max()), _TINY)
    viol = float(diff.max()) / scale if diff.size else 0.0
    if op.symmetric is not None:
        S = op.symmetric.toarray()
        viol = max(viol, float(np.abs(S - S.conj().T).max()) / max(float(np.abs(S).max()), _TINY))
    return _result("hermitian", viol, tol)


def check_phase_modulus(g, tol=TOLERANCES["phase"]) -> CheckResult:
    dev = np.abs(np.abs(g.sigma) - 1.0)
    if dev.size == 0:
        return _result("phase_modulus", 0.0, tol)
    k = int(np.argmax(dev))
    loc = f"[{g.ids[g.origin[k]]},{g.ids[g.terminus[k]]}]"
    return _result("phase_modulus", dev[k], tol, location=loc)


def leibniz_correction(g, u, v) -> np.ndarray:
    """``(1/w(x)) sum_{e in O_x} a(e) sigma(e^) u(t(e)) (v(x) - v(t(e)))``."""
    o, t, a, s, _ = g.oriented
    terms = a * np.conj(s) * u[t] * (v[o] - v[t])
    out = np.zeros(g.n_vertices, dtype=complex)
    np.add.at(out, o, terms)
    return out / g.w


def check_leibniz(g, u, v, tol=TOLERANCES["identity"]) -> CheckResult:
    """Product rule for the magnetic Laplacian."""
    u, v = np.asarray(u, dtype=complex), np.asarray(v, dtype=complex)
    lhs = laplacian_sigma(g, u * v)
    rhs = laplacian_sigma(g, u) * v + leibniz_correction(g, u, v)
    o, t, a, _, _ = g.oriented
    mag = a * (np.abs(u[o] * v[o]) + np.abs(u[t] * v[t]) + np.abs(u[t] * v[o]))
    scale = np.bincount(o, weights=mag, minlength=g.n_vertices) / g.w
    return _pointwise(g, "leibniz", lhs, rhs, scale, tol)


def check_kato(g, u, tol=TOLERANCES["kato"]) -> CheckResult:
    """``|u| Delta|u| <= Re(Delta_sigma u conj(u))`` pointwise."""
    u = np.asarray(u, dtype=complex)
    absu = np.abs(u)
    lhs = absu * physical_laplacian(g, absu).real
    rhs = (laplacian_sigma(g, u) * np.conj(u)).real
    o, t, a, _, _ = g.oriented
    mag = a * (absu[o] ** 2 + absu[o] * absu[t])
    scale = np.bincount(o, weights=mag, minlength=g.n_vertices) / g.w
    excess = (lhs - rhs) / np.maximum(scale, _TINY)
    excess = np.where(scale > 0, excess, 0.0)
    k = int(np.argmax(excess)) if excess.size else 0
    viol = max(0.0, float(excess[k])) if excess.size else 0.0
    return _result("kato", viol, tol, location=g.ids[k] if viol > 0 else None,
                   vertices=int(g.n_vertices))


# -- harmonic extensions ----------------------------------------------------------


@dataclass
class HarmonicExtension:
    """``u`` with ``H u = 0`` on ``interior`` and prescribed boundary values."""

    interior: np.ndarray
    boundary: dict
    solution: np.ndarray
    residual: float
    relative_residual: float


def _vertex_set(g, vertices):
    verts = np.unique(np.asarray([g.vertex_index(x) for x in vertices], dtype=np.int64))
    return verts


def _subset_ball(g, verts) -> Ball:
    mask = np.zeros(g.n_vertices, dtype=bool)
    mask[verts] = True
    in_o, in_t = mask[g.origin], mask[g.terminus]
    return Ball(center=int(verts[0]) if len(verts) else g.root, radius=-1,
                vertices=np.asarray(verts), interior_edges=np.flatnonzero(in_o & in_t),
                incident_edges=np.flatnonzero(in_o | in_t))


def harmonic_extension(g: MagneticGraph, interior, boundary_values: dict,
                       dense_limit: int = 3000) -> HarmonicExtension:
    """Solve ``(H u)(x) = 0`` for ``x`` in ``interior`` with ``u`` fixed on the boundary.

    Raises :class:`SingularSystemError` when the interior block has a zero
    eigenvalue (relative to its norm); shift ``q`` to avoid it.
    """
    interior = _vertex_set(g, interior)
    bvals = {g.vertex_index(x): complex(v) for x, v in boundary_values.items()}
    if set(bvals) & set(interior.tolist()):
        raise ValueError("boundary and interior overlap")
    u = np.zeros(g.n_vertices, dtype=complex)
    for i, val in bvals.items():
        u[i] = val
    known = np.zeros(g.n_vertices, dtype=bool)
    known[interior] = True
    known[list(bvals)] = True
    if interior.size == 0:
        return HarmonicExtension(interior, bvals, u, 0.0, 0.0)
    nbrs = g.adjacency[interior].indices
    if not known[nbrs].all():
        missing = g.ids[int(nbrs[~known[nbrs]][0])]
        raise ValueError(f"vertex {missing!r} neighbours the interior but has no value")

    op = assemble(g, _subset_ball(g, interior), symmetrize=True)
    # right-hand side: -(off-diagonal couplings to boundary) * boundary values
    inner = np.zeros(g.n_vertices, dtype=bool)
    inner[interior] = True
    u_b = np.where(inner, 0, u)
    rhs = -(laplacian_sigma(g, u_b) - g.weighted_degree / g.w * u_b)[interior]

    S = op.symmetric
    n = len(interior)
    root_w = np.sqrt(op.weights)
    if n <= dense_limit:
        Sd = S.toarray()
        evals = scipy.linalg.eigvalsh(Sd)
        smin = float(np.min(np.abs(evals)))
        if smin <= 1e-12 * max(float(np.max(np.abs(evals))), _TINY):
            raise SingularSystemError(
                f"interior block is singular (smallest singular value {smin:.3e})", smin)
        y = scipy.linalg.solve(Sd, root_w * rhs, assume_a="her")
    else:
        try:
            lu = splinalg.splu(sparse.csc_matrix(S))
        except RuntimeError as exc:
            raise SingularSystemError(f"interior block is singular: {exc}", 0.0) from exc
        y = lu.solve(root_w * rhs)
    u[interior] = y / root_w

    Hu = schrodinger(g, u)[interior]
    residual = float(np.max(np.abs(Hu)))
    scale = float(np.max(np.abs(u))) * float(np.max(g.weighted_degree[interior] / g.w[interior]
                                                     + np.abs(g.q[interior])))
    return HarmonicExtension(interior, bvals, u, residual, residual / max(scale, _TINY))


def shift_to_coercive(g: MagneticGraph, interior, floor: float = 1.0) -> MagneticGraph:
    """Add a constant to ``q`` so the Dirichlet block on ``interior`` is ``>= floor``."""
    verts = _vertex_set(g, interior)
    op = assemble(g, _subset_ball(g, verts), symmetrize=True)
    lam = float(scipy.linalg.eigvalsh(op.symmetric.toarray(), subset_by_index=[0, 0])[0])
    shift = max(0.0, floor - lam)
    return g.replace(q=g.q + shift) if shift else g


# -- quadratic form identities ------------------------------------------------------


def ground_form_rhs(g, u, phi) -> float:
    """Edge-sum form of ``(H(u phi), u phi)`` when ``H u = 0`` on ``supp phi``."""
    u1, u2 = u.real, u.imag
    o, t = g.origin, g.terminus
    sh = np.conj(g.sigma)  # sigma(e^)
    s1, s2 = sh.real, sh.imag
    dphi2 = (phi[o] - phi[t]) ** 2
    j1 = g.a * s1 * (u1[t] * u1[o] + u2[t] * u2[o]) * dphi2
    j2 = g.a * s2 * (-u1[o] * u2[t] + u1[t] * u2[o]) * dphi2
    return float(np.sum(j1) + np.sum(j2))


def ground_form_rhs_vertex_sum(g, u, phi) -> float:
    """The same quantity as half a sum over all oriented edges at each vertex."""
    u1, u2 = u.real, u.imag
    o, t, a, s, _ = g.oriented
    sh = np.conj(s)
    dphi2 = (phi[o] - phi[t]) ** 2
    j1 = a * sh.real * (u1[t] * u1[o] + u2[t] * u2[o]) * dphi2
    j2 = a * sh.imag * (-u1[o] * u2[t] + u1[t] * u2[o]) * dphi2
    return 0.5 * float(np.sum(j1) + np.sum(j2))


def _form_scale(g, u, phi):
    a = g.a
    o, t = g.origin, g.terminus
    return float(np.sum(a * np.abs(u[o]) * np.abs(u[t]) * (phi[o] - phi[t]) ** 2)
                 + np.sum(g.w * np.abs(u * phi) * np.abs(schrodinger(g, u * phi))))


def check_ground_form_identity(g, ext: HarmonicExtension, phi,
                               tol=TOLERANCES["solve"]) -> CheckResult:
    """``(H(u phi), u phi)`` against its edge-sum expression for harmonic ``u``."""
    phi = np.asarray(phi)
    if np.iscomplexobj(phi):
        if np.any(phi.imag != 0):
            raise ValueError("phi must be real")
        phi = phi.real
    phi = phi.astype(float)
    inside = np.zeros(g.n_vertices, dtype=bool)
    inside[ext.interior] = True
    if np.any((phi != 0) & ~inside):
        bad = g.ids[int(np.flatnonzero((phi != 0) & ~inside)[0])]
        raise ValueError(f"phi is nonzero at {bad!r}, outside the harmonic interior")
    u = ext.solution
    up = u * phi
    lhs = inner_v(g, schrodinger(g, up), up)
    rhs = ground_form_rhs(g, u, phi)
    return _scalar("ground_form_identity", lhs, rhs, _form_scale(g, u, phi), tol)


def check_general_product_identity(g, u, phi, tol=TOLERANCES["identity"]) -> CheckResult:
    """``(H(u phi), u phi) = (phi H u, u phi) + sum_x sum_{O_x} ...`` for any ``u``."""
    u = np.asarray(u, dtype=complex)
    phi = np.asarray(phi, dtype=float)
    up = u * phi
    lhs = inner_v(g, schrodinger(g, up), up)
    o, t, a, s, _ = g.oriented
    cross = a * np.conj(s) * u[t] * (phi[o] - phi[t]) * np.conj(u[o]) * phi[o]
    rhs = inner_v(g, phi * schrodinger(g, u), up) + complex(np.sum(cross))
    scale = float(np.sum(np.abs(cross))
                  + np.sum(g.w * np.abs(up) * (_abs_laplacian(g, up) + np.abs(g.q * up)))
                  + np.sum(g.w * np.abs(phi * up) * (_abs_laplacian(g, u) + np.abs(g.q * u))))
    return _scalar("product_identity", lhs, rhs, scale, tol)


# -- cut-off energy chains --------------------------------------------------------------


def _lambda_min_on(g, verts):
    if len(verts) == 0:
        return np.inf
    op = assemble(g, _subset_ball(g, verts), symmetrize=True)
    return float(scipy.linalg.eigvalsh(op.symmetric.toarray(), subset_by_index=[0, 0])[0])


def _inequality_chain(name, steps, tol, **details):
    """``steps`` is a list of ``(label, value)`` that must be nondecreasing."""
    worst = 0.0
    where = None
    slack = {}
    scale = max(max(abs(v) for _, v in steps), _TINY)
    for (la, va), (lb, vb) in zip(steps, steps[1:]):
        slack[f"{la} <= {lb}"] = float(vb - va)
        excess = (va - vb) / scale
        if excess > worst:
            worst, where = excess, f"{la} <= {lb}"
    details.update({label: float(v) for label, v in steps})
    return _result(name, worst, tol, location=where, slack=slack, **details)


def cutoff_growth_constants(g, x0, radius):
    """``m`` and ``a`` (max degree, max ``a(e)/w(x)``) over ``B_radius`` in the stored graph."""
    b = ball(g, x0, radius)
    m = int(g.degrees[b.vertices].max())
    best = np.zeros(g.n_vertices)
    np.maximum.at(best, g.origin, g.a / g.w[g.origin])
    np.maximum.at(best, g.terminus, g.a / g.w[g.terminus])
    return m, float(best[b.vertices].max()), b


def check_cutoff_energy_bound(g, ext: HarmonicExtension, n: int, x0=None,
                              tol=TOLERANCES["inequality"]) -> CheckResult:
    """Energy chain for the combinatorial cut-off ``phi_n``.

    ``(H(u phi_n), u phi_n) <= n^-2 sum_{e in B_2n} a(e)|u|^2(ends)
    <= (m_2n a_2n / n^2) ||u||^2``, where the edge sum runs over edges with
    both ends in ``B_2n``.  The last link uses the lowest Dirichlet
    eigenvalue on ``supp phi_n``: ``lambda ||u phi_n||^2`` must not exceed
    the bound either.
    """
    x0 = g.root if x0 is None else g.vertex_index(x0)
    cut = phi_n(g, x0, n)
    phi = cut.values
    inside = np.zeros(g.n_vertices, dtype=bool)
    inside[ext.interior] = True
    if np.any((phi != 0) & ~inside):
        raise ValueError(f"supp phi_{n} is not contained in the harmonic interior")
    u = ext.solution
    up = u * phi
    form = inner_v(g, schrodinger(g, up), up)
    m, a_max, b2 = cutoff_growth_constants(g, x0, 2 * n)
    ie = b2.interior_edges
    o, t = g.origin[ie], g.terminus[ie]
    middle = float(np.sum(g.a[ie] * (np.abs(u[o]) ** 2 + np.abs(u[t]) ** 2))) / n ** 2
    ball_norm = float(np.sum(g.w[b2.vertices] * np.abs(u[b2.vertices]) ** 2))
    bound_ball = m * a_max / n ** 2 * ball_norm
    bound = m * a_max / n ** 2 * norm_v(g, u) ** 2
    lam = _lambda_min_on(g, np.flatnonzero(phi != 0))
    floor = lam * norm_v(g, up) ** 2
    res = _inequality_chain(
        "cutoff_energy_phi",
        [("lambda_min*||u phi||^2", floor), ("(H(u phi),u phi)", form.real),
         ("edge_sum/n^2", middle), ("m*a/n^2*||u||_B^2", bound_ball),
         ("m*a/n^2*||u||^2", bound)],
        tol, n=n, m_2n=m, a_2n=a_max, lambda_min=lam, normalized=bool(lam >= 1.0),
        form_imag=float(form.imag),
    )
    if res.passed and lam >= 1.0:
        res.details["final"] = "||u phi_n||^2 <= m_2n a_2n / n^2 ||u||^2"
    return res


def psi_energy_terms(g, u, psi, R, d0, shell="metric"):
    """The successive upper bounds for ``(H(u psi), u psi)``.

    Returns the half-sum over all oriented edges, the same sum restricted to
    origins in ``S`` with ``d_wa`` in place of the cut-off increment, and the
    degree bound ``N/2 sum_S w |u|^2``.  ``shell="metric"`` takes
    ``S = U_{R+1} \\ U_R``; ``shell="active"`` takes every vertex with a
    neighbour at which ``psi`` differs, the set the half-sum actually sees.
    """
    o, t, a, _, _ = g.oriented
    absu2 = np.abs(u) ** 2
    step5 = 0.5 * float(np.sum(a * absu2[o] * (psi[o] - psi[t]) ** 2))
    if shell == "metric":
        S = (d0 > R) & (d0 <= R + 1)
    elif shell == "active":
        S = np.zeros(g.n_vertices, dtype=bool)
        S[o[psi[o] != psi[t]]] = True
    else:
        raise ValueError("shell must be 'metric' or 'active'")
    sel = S[o]
    step6 = 0.5 * float(np.sum(a[sel] * absu2[o[sel]] * adjacent_distances(g, o[sel], t[sel]) ** 2))
    N = int(g.degrees.max())
    step7 = 0.5 * N * float(np.sum(g.w[S] * absu2[S]))
    return step5, step6, step7, S, N


def adjacent_distances(g, o, t) -> np.ndarray:
    """``d_wa(o[i], t[i])`` for adjacent pairs (may undercut the edge length)."""
    out = np.empty(len(o))
    if len(o) == 0:
        return out
    srcs, inv = np.unique(o, return_inverse=True)
    D = np.vstack([distances_from(g, [s]) for s in srcs])
    out[:] = D[inv, t]
    return out


def check_psi_energy_bound(g, ext: HarmonicExtension, R: float, x0=None, shell="metric",
                           tol=TOLERANCES["inequality"]) -> CheckResult:
    """Energy chain for the Lipschitz cut-off ``psi_R``.

    ``lambda ||u psi||^2 <= (H(u psi), u psi)
    <= 1/2 sum_{x in S} sum_{O_x} a |u(x)|^2 d_wa^2 <= N/2 sum_{x in S} w |u|^2``.

    With ``shell="metric"`` (``S`` the metric shell) the middle link can fail:
    edges leaving ``U_R`` or entering ``V \\ U_{R+1}`` still carry a cut-off
    increment but have their origin outside ``S``.  ``shell="active"`` is the
    sound version.
    """
    x0 = g.root if x0 is None else g.vertex_index(x0)
    cut = psi_R(g, x0, R)
    psi = cut.values
    inside = np.zeros(g.n_vertices, dtype=bool)
    inside[ext.interior] = True
    if np.any((psi != 0) & ~inside):
        raise ValueError(f"supp psi_R (R={R}) is not contained in the harmonic interior")
    u = ext.solution
    up = u * psi
    form = inner_v(g, schrodinger(g, up), up)
    step5, step6, step7, S, N = psi_energy_terms(g, u, psi, R, cut.distances, shell)
    lam = _lambda_min_on(g, np.flatnonzero(psi != 0))
    floor = lam * norm_v(g, up) ** 2
    return _inequality_chain(
        f"cutoff_energy_psi_{shell}",
        [("lambda_min*||u psi||^2", floor), ("(H(u psi),u psi)", form.real),
         ("S_edge_sum", step6), ("N/2*||u||_S^2", step7)],
        tol, R=float(R), N=N, lambda_min=lam, normalized=bool(lam >= 1.0),
        half_sum_all_edges=step5, set_size=int(S.sum()), shell=shell,
        form_imag=float(form.imag),
    )
