"""Vertex/edge fields and the magnetic operators on a stored graph.

Vertex fields are complex numpy arrays indexed by dense vertex index; the
support is the set of nonzero entries.  Edge fields are arrays indexed by
stored edge index and hold the value on the stored orientation.  The value
on a reversed edge is ``-Y(e)``; use :func:`edge_value` rather than indexing
when the orientation matters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .graph import Ball, MagneticGraph, ball_mask


def vertex_field(g: MagneticGraph, values=None) -> np.ndarray:
    """A vertex field from a mapping ``{vertex: value}`` (absent means 0)."""
    f = np.zeros(g.n_vertices, dtype=complex)
    for x, val in (values or {}).items():
        f[g.vertex_index(x)] = val
    return f


def indicator(g: MagneticGraph, x) -> np.ndarray:
    f = np.zeros(g.n_vertices, dtype=complex)
    f[g.vertex_index(x)] = 1.0
    return f


def support(f) -> np.ndarray:
    return np.flatnonzero(np.asarray(f) != 0)


def edge_value(g: MagneticGraph, Y, x, y) -> complex:
    """``Y([x, y])`` honouring ``Y(e^) = -Y(e)``."""
    k, rev = g.edge_index(x, y)
    return -Y[k] if rev else Y[k]


def _scatter(n, idx, vals):
    out = np.zeros(n, dtype=complex)
    np.add.at(out, idx, vals)
    return out


def inner_v(g: MagneticGraph, f, h) -> complex:
    """Weighted vertex inner product ``sum_x w(x) f(x) conj(h(x))``."""
    return complex(np.sum(g.w * np.asarray(f) * np.conj(h)))


def norm_v(g: MagneticGraph, f) -> float:
    return float(np.sqrt(np.sum(g.w * np.abs(f) ** 2)))


def inner_e(g: MagneticGraph, F, G) -> complex:
    """Edge inner product ``sum_{e in E_s} a(e) F(e) conj(G(e))``."""
    return complex(np.sum(g.a * np.asarray(F) * np.conj(G)))


def d_plain(g: MagneticGraph, u) -> np.ndarray:
    u = np.asarray(u)
    return u[g.terminus] - u[g.origin]


def d_sigma(g: MagneticGraph, u) -> np.ndarray:
    """Deformed differential ``conj(sigma(e)) u(t(e)) - u(o(e))`` on stored edges."""
    u = np.asarray(u)
    return np.conj(g.sigma) * u[g.terminus] - u[g.origin]


def delta_sigma(g: MagneticGraph, Y) -> np.ndarray:
    """Deformed co-differential of an edge field."""
    Y = np.asarray(Y)
    n = g.n_vertices
    into = _scatter(n, g.terminus, g.sigma * g.a * Y)
    out = _scatter(n, g.origin, g.a * Y)
    return (into - out) / g.w


def laplacian_sigma(g: MagneticGraph, u, restrict_to: Ball | None = None,
                    sigma=None) -> np.ndarray:
    """Magnetic Laplacian, summed over oriented edges leaving each vertex.

    ``sigma`` overrides the graph phases (``sigma=1`` gives the physical
    Laplacian).  With ``restrict_to`` the result is zeroed off the ball.
    """
    u = np.asarray(u, dtype=complex)
    o, t, a, s, _ = g.oriented
    if sigma is not None:
        s = np.broadcast_to(np.asarray(sigma, dtype=complex), s.shape)
    # sigma(e^) = conj(sigma(e))
    terms = a * (u[o] - np.conj(s) * u[t])
    out = _scatter(g.n_vertices, o, terms) / g.w
    if restrict_to is not None:
        out[~ball_mask(g, restrict_to)] = 0
    return out


def physical_laplacian(g: MagneticGraph, u) -> np.ndarray:
    return laplacian_sigma(g, u, sigma=1.0)


def schrodinger(g: MagneticGraph, u, restrict_to: Ball | None = None) -> np.ndarray:
    """``H u = Delta_sigma u + q u``."""
    out = laplacian_sigma(g, u) + g.q * np.asarray(u)
    if restrict_to is not None:
        out[~ball_mask(g, restrict_to)] = 0
    return out


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    """Dirichlet restriction of ``H`` to functions supported in a ball.

    ``matrix[i, j]`` acts on ball-local indices ``ball.vertices``; ``weights``
    is the weight diagonal in the same order.  ``symmetric`` is
    ``D^(1/2) M D^(-1/2)`` when requested.
    """

    ball: Ball
    matrix: sparse.csr_matrix
    weights: np.ndarray
    symmetric: sparse.csr_matrix | None = None

    @property
    def symmetrized(self) -> bool:
        return self.symmetric is not None

    @property
    def dim(self) -> int:
        return len(self.weights)


def assemble(g: MagneticGraph, b: Ball, symmetrize: bool = True) -> TruncatedOperator:
    """Matrix of ``H`` on ball-supported functions.

    The diagonal keeps the full weighted degree, so edges that leave the
    ball still contribute ``a(e)/w(x)``.
    """
    verts = np.asarray(b.vertices)
    if verts.size == 0:
        raise ValueError("cannot assemble on an empty ball")
    local = np.full(g.n_vertices, -1, dtype=np.int64)
    local[verts] = np.arange(len(verts))
    w = g.w[verts]
    diag = g.weighted_degree[verts] / w + g.q[verts]

    o, t, a, s, _ = g.oriented
    keep = (local[o] >= 0) & (local[t] >= 0)
    rows, cols = local[o[keep]], local[t[keep]]
    # M[x, y] = -a([x,y]) sigma([y,x]) / w(x); sigma([y,x]) = conj(sigma([x,y]))
    vals = -a[keep] * np.conj(s[keep]) / g.w[o[keep]]
    dim = len(verts)
    idx = np.arange(dim)
    M = sparse.csr_matrix(
        (np.concatenate([diag.astype(complex), vals]),
         (np.concatenate([idx, rows]), np.concatenate([idx, cols]))),
        shape=(dim, dim),
    )
    S = None
    if symmetrize:
        root_w = np.sqrt(w)
        S = sparse.diags(root_w) @ M @ sparse.diags(1.0 / root_w)
        S = sparse.csr_matrix(S)
        # exact Hermitian part; entries agree to rounding already
        S = sparse.csr_matrix(0.5 * (S + S.getH()))
    return TruncatedOperator(ball=b, matrix=M, weights=w, symmetric=S)
