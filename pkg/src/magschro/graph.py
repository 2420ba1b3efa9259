"""Weighted magnetic graphs: data model, validation, JSON I/O and balls.

A graph stores one orientation per unoriented edge (the list of edges *is*
the fixed orientation).  Reverse edges are never stored; they are derived on
demand with the same weight ``a`` and the conjugate phase.

Vertex ids are strings in files and dense integer indices in memory.  Index
order is the file (or generation) order, which fixes every matrix layout.
"""

from __future__ import annotations

import hashlib
import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .exceptions import GraphParseError, GraphValidationError

# tolerance on |sigma| accepted from files before normalization
PHASE_LOAD_TOL = 1e-6


def _readonly(arr, dtype):
    out = np.array(arr, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class OrientedEdge:
    """One element of the oriented edge set, possibly a derived reverse."""

    origin: int
    terminus: int
    a: float
    sigma: complex
    stored_index: int
    reversed: bool = False

    def reverse(self) -> "OrientedEdge":
        return OrientedEdge(
            self.terminus,
            self.origin,
            self.a,
            self.sigma.conjugate(),
            self.stored_index,
            not self.reversed,
        )


@dataclass(frozen=True, eq=False)
class MagneticGraph:
    """Finite (possibly truncated) weighted graph with phases and potential.

    Arrays are indexed by dense vertex index (``w``, ``q``) or by stored edge
    index (``origin``, ``terminus``, ``a``, ``sigma``).  Instances are
    immutable; use :meth:`replace` to derive modified copies.

    ``truncation_radius`` is set when the graph is the combinatorial ball of
    that radius about ``root`` in an infinite family; vertices on the outer
    sphere may then be missing edges.  ``w_exact`` / ``a_exact`` carry exact
    rational weights when a generator knows them.
    """

    ids: tuple
    w: np.ndarray
    q: np.ndarray
    origin: np.ndarray
    terminus: np.ndarray
    a: np.ndarray
    sigma: np.ndarray
    root: int = 0
    truncation_radius: int | None = None
    family: str | None = None
    params: dict = field(default_factory=dict)
    w_exact: tuple | None = None
    a_exact: tuple | None = None

    @classmethod
    def build(cls, ids, w, q, origin, terminus, a, sigma=None, root=0,
              validate=True, normalize_phase=True, **meta):
        """Construct, validate and freeze a graph from plain sequences."""
        n_edges = len(origin)
        if sigma is None:
            sigma = np.ones(n_edges, dtype=complex)
        sigma = np.asarray(sigma, dtype=complex)
        if normalize_phase and n_edges:
            mod = np.abs(sigma)
            bad = np.flatnonzero(np.abs(mod - 1.0) > PHASE_LOAD_TOL)
            if validate and bad.size:
                k = int(bad[0])
                raise GraphValidationError(
                    f"edge [{ids[origin[k]]},{ids[terminus[k]]}] has |sigma| = "
                    f"{float(mod[k])!r}, expected 1", item=k)
            # leave phases already unit to rounding untouched so files round-trip bit-exactly
            fix = np.abs(mod - 1.0) > 4 * np.finfo(float).eps
            sigma = np.where(fix, sigma / np.where(mod > 0, mod, 1.0), sigma)
        g = cls(
            ids=tuple(str(i) for i in ids),
            w=_readonly(w, float),
            q=_readonly(q, float),
            origin=_readonly(origin, np.int64),
            terminus=_readonly(terminus, np.int64),
            a=_readonly(a, float),
            sigma=_readonly(sigma, complex),
            root=int(root),
            **meta,
        )
        if validate:
            g.validate()
        return g

    def replace(self, validate=True, **changes) -> "MagneticGraph":
        """Copy with some fields replaced (e.g. a shifted potential)."""
        fields = dict(
            ids=self.ids, w=self.w, q=self.q, origin=self.origin,
            terminus=self.terminus, a=self.a, sigma=self.sigma, root=self.root,
            truncation_radius=self.truncation_radius, family=self.family,
            params=self.params, w_exact=self.w_exact, a_exact=self.a_exact,
        )
        fields.update(changes)
        if "w" in changes and "w_exact" not in changes:
            fields["w_exact"] = None
        if "a" in changes and "a_exact" not in changes:
            fields["a_exact"] = None
        return MagneticGraph.build(validate=validate, normalize_phase=False, **fields)

    # -- sizes and lookups -------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.ids)

    @property
    def n_edges(self) -> int:
        return len(self.origin)

    @cached_property
    def index(self) -> dict:
        return {vid: i for i, vid in enumerate(self.ids)}

    def vertex_index(self, x) -> int:
        """Dense index of ``x``, given either as an id string or an index."""
        if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
            if 0 <= x < self.n_vertices:
                return int(x)
            raise KeyError(f"unknown vertex index {x}")
        try:
            return self.index[str(x)]
        except KeyError:
            raise KeyError(f"unknown vertex {x!r}") from None

    # -- derived structure ---------------------------------------------------

    @cached_property
    def oriented(self):
        """All oriented edges as arrays ``(o, t, a, sigma, stored_index)``.

        The first ``n_edges`` entries are the stored orientation, the next
        ``n_edges`` their reverses with conjugated phase.
        """
        o = np.concatenate([self.origin, self.terminus])
        t = np.concatenate([self.terminus, self.origin])
        a = np.concatenate([self.a, self.a])
        s = np.concatenate([self.sigma, self.sigma.conj()])
        k = np.concatenate([np.arange(self.n_edges)] * 2)
        return o, t, a, s, k

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.bincount(self.origin, minlength=self.n_vertices)
        deg += np.bincount(self.terminus, minlength=self.n_vertices)
        deg.setflags(write=False)
        return deg

    @cached_property
    def weighted_degree(self) -> np.ndarray:
        """``sum_{e in O_x} a(e)`` for every vertex."""
        out = np.bincount(self.origin, weights=self.a, minlength=self.n_vertices)
        out += np.bincount(self.terminus, weights=self.a, minlength=self.n_vertices)
        return out

    @cached_property
    def adjacency(self) -> sparse.csr_matrix:
        """Unweighted symmetric adjacency (pattern only)."""
        n = self.n_vertices
        o, t, *_ = self.oriented
        return sparse.csr_matrix((np.ones(len(o)), (o, t)), shape=(n, n))

    @cached_property
    def _incidence_lists(self):
        lists = [[] for _ in range(self.n_vertices)]
        for k, (x, y) in enumerate(zip(self.origin.tolist(), self.terminus.tolist())):
            lists[x].append((k, False))
            lists[y].append((k, True))
        return lists

    def degree(self, x) -> int:
        return int(self.degrees[self.vertex_index(x)])

    def incident(self, x) -> list:
        """Oriented edges ``e`` with ``o(e) = x``, one per neighbour."""
        i = self.vertex_index(x)
        out = []
        for k, rev in self._incidence_lists[i]:
            e = OrientedEdge(int(self.origin[k]), int(self.terminus[k]),
                             float(self.a[k]), complex(self.sigma[k]), k)
            out.append(e.reverse() if rev else e)
        return out

    def edge_index(self, x, y):
        """``(stored_index, reversed)`` for the edge joining ``x`` and ``y``."""
        i, j = self.vertex_index(x), self.vertex_index(y)
        for k, rev in self._incidence_lists[i]:
            other = int(self.origin[k]) if rev else int(self.terminus[k])
            if other == j:
                return k, rev
        raise KeyError(f"no edge between {self.ids[i]!r} and {self.ids[j]!r}")

    @cached_property
    def hops_from_root(self) -> np.ndarray:
        return hop_distances(self, self.root)

    # -- validation ------------------------------------------------------------

    def validate(self) -> None:
        n = self.n_vertices
        if n == 0:
            raise GraphValidationError("graph has no vertices")
        if len(set(self.ids)) != n:
            seen = set()
            for vid in self.ids:
                if vid in seen:
                    raise GraphValidationError(f"duplicate vertex id {vid!r}", item=vid)
                seen.add(vid)
        for arr, name in ((self.w, "w"), (self.q, "q")):
            if arr.shape != (n,):
                raise GraphValidationError(f"{name} has shape {arr.shape}, expected ({n},)")
        if not np.all(np.isfinite(self.q)):
            k = int(np.flatnonzero(~np.isfinite(self.q))[0])
            raise GraphValidationError(f"vertex {self.ids[k]!r} has non-finite q", item=self.ids[k])
        bad = np.flatnonzero(~(self.w > 0) | ~np.isfinite(self.w))
        if bad.size:
            vid = self.ids[int(bad[0])]
            raise GraphValidationError(f"vertex {vid!r} has nonpositive weight w", item=vid)
        m = self.n_edges
        for arr, name in ((self.terminus, "terminus"), (self.a, "a"), (self.sigma, "sigma")):
            if arr.shape != (m,):
                raise GraphValidationError(f"edge array {name} has wrong length")
        if m and (self.origin.min() < 0 or self.terminus.min() < 0
                  or max(self.origin.max(), self.terminus.max()) >= n):
            raise GraphValidationError("edge endpoint out of range")
        for k in range(m):
            if self.origin[k] == self.terminus[k]:
                vid = self.ids[int(self.origin[k])]
                raise GraphValidationError(f"edge [{vid},{vid}] is a loop", item=k)
        bad = np.flatnonzero(~(self.a > 0) | ~np.isfinite(self.a))
        if bad.size:
            k = int(bad[0])
            raise GraphValidationError(
                f"edge [{self.ids[self.origin[k]]},{self.ids[self.terminus[k]]}] "
                "has nonpositive weight a", item=k)
        if m:
            lo = np.minimum(self.origin, self.terminus)
            hi = np.maximum(self.origin, self.terminus)
            key = lo * n + hi
            uniq, first, counts = np.unique(key, return_index=True, return_counts=True)
            if np.any(counts > 1):
                dup = int(uniq[np.flatnonzero(counts > 1)[0]])
                x, y = self.ids[dup // n], self.ids[dup % n]
                raise GraphValidationError(f"multi-edge between {x!r} and {y!r}", item=(x, y))
        if not 0 <= self.root < n:
            raise GraphValidationError("root out of range")
        n_comp, labels = csgraph.connected_components(self.adjacency, directed=False)
        if n_comp > 1:
            lost = self.ids[int(np.flatnonzero(labels != labels[self.root])[0])]
            raise GraphValidationError(
                f"graph is disconnected (vertex {lost!r} unreachable from root)", item=lost)

    # -- serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        verts = [{"id": vid, "w": float(self.w[i]), "q": float(self.q[i])}
                 for i, vid in enumerate(self.ids)]
        edges = []
        for k in range(self.n_edges):
            s = complex(self.sigma[k])
            edges.append({
                "from": self.ids[int(self.origin[k])],
                "to": self.ids[int(self.terminus[k])],
                "a": float(self.a[k]),
                "sigma": {"re": s.real, "im": s.imag},
            })
        out = {"vertices": verts, "edges": edges, "root": self.ids[self.root]}
        meta = {}
        if self.family is not None:
            meta["family"] = self.family
            meta["params"] = _jsonable(self.params)
        if self.truncation_radius is not None:
            meta["truncation_radius"] = self.truncation_radius
        if meta:
            out["meta"] = meta
        return out

    def content_hash(self) -> str:
        """SHA-256 of the canonical JSON encoding."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def graph_from_dict(data: dict, validate=True) -> MagneticGraph:
    """Parse the JSON graph schema (already decoded) into a graph."""
    if not isinstance(data, dict):
        raise GraphParseError("top-level JSON value must be an object")
    try:
        verts = data["vertices"]
        edges = data["edges"]
    except KeyError as exc:
        raise GraphParseError(f"missing key {exc.args[0]!r}") from None
    if not isinstance(verts, list) or not isinstance(edges, list):
        raise GraphParseError("'vertices' and 'edges' must be arrays")
    ids, w, q = [], [], []
    try:
        for v in verts:
            ids.append(str(v["id"]))
            w.append(float(v["w"]))
            q.append(float(v.get("q", 0.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphParseError(f"bad vertex entry: {exc}") from None
    index = {}
    for i, vid in enumerate(ids):
        if vid in index:
            raise GraphValidationError(f"duplicate vertex id {vid!r}", item=vid)
        index[vid] = i
    origin, terminus, a, sigma = [], [], [], []
    for e in edges:
        try:
            x, y = str(e["from"]), str(e["to"])
            a.append(float(e["a"]))
            s = e.get("sigma", {"re": 1.0, "im": 0.0})
            sigma.append(complex(float(s["re"]), float(s["im"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphParseError(f"bad edge entry: {exc}") from None
        for vid in (x, y):
            if vid not in index:
                raise GraphValidationError(f"edge [{x},{y}] references unknown vertex {vid!r}",
                                           item=vid)
        if x == y:
            raise GraphValidationError(f"edge [{x},{y}] is a loop", item=(x, y))
        origin.append(index[x])
        terminus.append(index[y])
    root = data.get("root", ids[0] if ids else None)
    if root not in index:
        raise GraphValidationError(f"root {root!r} is not a vertex", item=root)
    meta = data.get("meta", {}) or {}
    return MagneticGraph.build(
        ids, w, q, origin, terminus, a, sigma, root=index[root], validate=validate,
        truncation_radius=meta.get("truncation_radius"),
        family=meta.get("family"),
        params=meta.get("params", {}),
    )


def load_graph(path, validate=True) -> MagneticGraph:
    """Read and validate a graph file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise GraphParseError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphParseError(f"{path}: {exc}") from None
    return graph_from_dict(data, validate=validate)


def dumps_graph(g: MagneticGraph) -> str:
    return json.dumps(g.to_dict(), indent=1) + "\n"


def save_graph(g: MagneticGraph, path) -> None:
    from .export import atomic_write_text

    atomic_write_text(path, dumps_graph(g))


# -- balls ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Ball:
    """Combinatorial ball ``{x : d(x0, x) <= n}`` with its edge sets.

    ``interior_edges`` have both endpoints in the ball; ``incident_edges``
    have at least one.  Both hold stored edge indices in storage order.
    """

    center: int
    radius: int
    vertices: np.ndarray
    interior_edges: np.ndarray
    incident_edges: np.ndarray

    def __len__(self):
        return len(self.vertices)


def hop_distances(g: MagneticGraph, x0) -> np.ndarray:
    """Combinatorial distance ``r(x) = d(x0, x)`` by breadth-first search."""
    i0 = g.vertex_index(x0)
    dist = np.full(g.n_vertices, -1, dtype=np.int64)
    dist[i0] = 0
    indptr, indices = g.adjacency.indptr, g.adjacency.indices
    queue = deque([i0])
    while queue:
        x = queue.popleft()
        for y in indices[indptr[x]:indptr[x + 1]]:
            if dist[y] < 0:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def ball(g: MagneticGraph, x0, n: int) -> Ball:
    if n < 0:
        raise ValueError("ball radius must be nonnegative")
    i0 = g.vertex_index(x0)
    r = g.hops_from_root if i0 == g.root else hop_distances(g, i0)
    inside = (r >= 0) & (r <= n)
    in_o, in_t = inside[g.origin], inside[g.terminus]
    return Ball(
        center=i0,
        radius=int(n),
        vertices=np.flatnonzero(inside),
        interior_edges=np.flatnonzero(in_o & in_t),
        incident_edges=np.flatnonzero(in_o | in_t),
    )


def ball_mask(g: MagneticGraph, b: Ball) -> np.ndarray:
    mask = np.zeros(g.n_vertices, dtype=bool)
    mask[b.vertices] = True
    return mask


def degree(g: MagneticGraph, x) -> int:
    return g.degree(x)


def incident(g: MagneticGraph, x) -> list:
    return g.incident(x)
