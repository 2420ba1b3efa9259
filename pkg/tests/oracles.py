"""Independent reference computations.

Nothing here calls into the operator, metric or criteria code.  Each oracle
reads only the raw stored arrays of a graph and recomputes by plain loops.
"""

import heapq
import itertools
import math
from fractions import Fraction

import numpy as np


def neighbours(g):
    """``{x: [(y, a, sigma_xy)]}`` with ``sigma_yx = conj(sigma_xy)``."""
    nb = {i: [] for i in range(g.n_vertices)}
    for k in range(g.n_edges):
        x, y = int(g.origin[k]), int(g.terminus[k])
        a, s = float(g.a[k]), complex(g.sigma[k])
        nb[x].append((y, a, s))
        nb[y].append((x, a, s.conjugate()))
    return nb


def laplacian_loop(g, u):
    nb = neighbours(g)
    out = np.zeros(g.n_vertices, dtype=complex)
    for x in range(g.n_vertices):
        acc = 0j
        for y, a, s in nb[x]:
            # sigma of the reversed edge [y, x]
            acc += a * (u[x] - s.conjugate() * u[y])
        out[x] = acc / g.w[x]
    return out


def d_sigma_loop(g, u):
    return np.array([np.conj(g.sigma[k]) * u[g.terminus[k]] - u[g.origin[k]]
                     for k in range(g.n_edges)], dtype=complex)


def delta_sigma_loop(g, Y):
    out = np.zeros(g.n_vertices, dtype=complex)
    for k in range(g.n_edges):
        x, y = g.origin[k], g.terminus[k]
        out[y] += g.sigma[k] * g.a[k] * Y[k]
        out[x] -= g.a[k] * Y[k]
    return out / g.w


def dense_matrix(g, vertices=None):
    """Dirichlet matrix on ``vertices`` (all by default), built entry by entry."""
    verts = list(range(g.n_vertices)) if vertices is None else [int(v) for v in vertices]
    pos = {v: i for i, v in enumerate(verts)}
    nb = neighbours(g)
    M = np.zeros((len(verts), len(verts)), dtype=complex)
    for x in verts:
        i = pos[x]
        M[i, i] = sum(a for _, a, _ in nb[x]) / g.w[x] + g.q[x]
        for y, a, s in nb[x]:
            if y in pos:
                M[i, pos[y]] += -a * s.conjugate() / g.w[x]
    return M


def eigvals_oracle(g, vertices=None):
    """Sorted real parts of ``numpy.linalg.eigvals`` of the non-symmetrized matrix."""
    return np.sort(np.linalg.eigvals(dense_matrix(g, vertices)).real)


def cycle_spectrum(n, flux):
    """Unit-weight ``n``-cycle, total flux ``flux``: ``2 - 2 cos((flux + 2 pi k)/n)``."""
    return np.sort([2 - 2 * math.cos((flux + 2 * math.pi * k) / n) for k in range(n)])


def path_enum_dist(g, x, y):
    """Shortest weighted path by enumerating every simple path (tiny graphs only)."""
    nb = neighbours(g)
    length = {}
    for v in range(g.n_vertices):
        for t, a, _ in nb[v]:
            length[(v, t)] = math.sqrt(min(g.w[v], g.w[t]) / a)
    best = math.inf

    def walk(v, seen, acc):
        nonlocal best
        if acc >= best:
            return
        if v == y:
            best = acc
            return
        for t, _, _ in nb[v]:
            if t not in seen:
                seen.add(t)
                walk(t, seen, acc + length[(v, t)])
                seen.remove(t)

    walk(x, {x}, 0.0)
    return best


def heap_dijkstra(g, x0):
    """Textbook binary-heap Dijkstra over the raw edge list."""
    nb = neighbours(g)
    dist = [math.inf] * g.n_vertices
    dist[x0] = 0.0
    heap = [(0.0, x0)]
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist[v]:
            continue
        for t, a, _ in nb[v]:
            nd = d + math.sqrt(min(g.w[v], g.w[t]) / a)
            if nd < dist[t]:
                dist[t] = nd
                heapq.heappush(heap, (nd, t))
    return np.array(dist)


def halfline_partial_sums(K):
    """``sum_{n<k} 1/sqrt((n+1)(n+2))`` for ``k = 0..K``, Neumaier-compensated."""
    out = np.zeros(K + 1)
    s = c = 0.0
    for n in range(K):
        t = 1.0 / math.sqrt((n + 1) * (n + 2))
        hi = s + t
        c += (s - hi) + t if abs(s) >= abs(t) else (t - hi) + s
        s = hi
        out[n + 1] = s + c
    return out


def first_K_exceeding(threshold):
    """Smallest ``K`` with ``sum_{n<K} 1/sqrt((n+1)(n+2)) > threshold`` (exact-ish fsum)."""
    terms = []
    K = 0
    while math.fsum(terms) <= threshold:
        terms.append(1.0 / math.sqrt((K + 1) * (K + 2)))
        K += 1
    return K


def halfline_assumption_a(K):
    """Exact ``(m_K, a_K)`` for the halfline example weights by brute force.

    Vertex ``j`` has weight ``1/(j+1)``; edge ``[j-1, j]`` has ``a = j``.
    """
    m, a = 0, Fraction(0)
    for x in range(K + 1):
        deg = 1 if x == 0 else 2
        m = max(m, deg)
        w = Fraction(1, x + 1)
        for e_a in ([x] if x > 0 else []) + [x + 1]:
            a = max(a, Fraction(e_a) / w)
    return m, a


def random_fields(rng, n, m):
    u = rng.normal(size=n) + 1j * rng.normal(size=n)
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    Y = rng.normal(size=m) + 1j * rng.normal(size=m)
    return u, v, Y


def kato_lhs_rhs_loop(g, u):
    """``Re(sgn(u) conj * Delta_sigma u)`` and ``Delta |u|`` at each vertex."""
    L = laplacian_loop(g, u)
    absu = np.abs(u)
    nb = neighbours(g)
    plain = np.array([sum(a * (absu[x] - absu[y]) for y, a, _ in nb[x]) / g.w[x]
                      for x in range(g.n_vertices)])
    sgn = np.where(absu > 0, u / np.where(absu > 0, absu, 1), 0)
    return (np.conj(sgn) * L).real, plain


def all_pairs(iterable):
    return itertools.combinations(iterable, 2)
