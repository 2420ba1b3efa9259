"""Procedural graph families and their closed-form growth data.

Infinite families (``halfline``, ``triangular``) are materialized as the
combinatorial ball of a given radius about the root.  Finite families
(``cycle``, ``random``) ignore the radius.  Each family also knows, where it
can, the exact per-layer quantities that the diagnostics need: the full
degree and the largest ``a(e)/w(x)`` among vertices at hop distance ``r``.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .graph import MagneticGraph

FAMILIES = ("halfline", "triangular", "cycle", "random")


class Family:
    """Base class; subclasses fill in generation and closed forms."""

    name = None
    infinite = True

    allowed = ()

    def __init__(self, **params):
        unknown = sorted(set(params) - set(self.allowed))
        if unknown:
            raise ValueError(f"{self.name} does not take parameter(s) {unknown}; "
                             f"allowed: {list(self.allowed)}")
        self.params = self._check(dict(params))

    def _check(self, params):
        return params

    def __repr__(self):
        return f"{type(self).__name__}({self.params})"

    def generate(self, radius: int) -> MagneticGraph:
        raise NotImplementedError

    # closed forms; ``None`` means "not derivable for this family"

    def layer_degree(self, r: int):
        return None

    def layer_inward_degree(self, r: int):
        """Edges from a layer-``r`` vertex to layers ``<= r`` (max over the layer)."""
        return None

    def layer_a_over_w(self, r: int):
        return None

    def bounded_degree(self):
        """``(N, exact)``; ``N is None`` with ``exact=True`` means unbounded."""
        return None, False

    def weight_constant(self):
        return None

    def q_lower_bound(self):
        return None

    def assumption_a_limit(self):
        return None

    def sphere_distance(self, n: int):
        """Closed form of ``min_{r(x)=n} d_wa(x0, x)``."""
        return None

    def completeness(self):
        """``(complete?, justification)`` from a closed-form lower bound."""
        return None, "no closed form"

    def reference_classification(self):
        return None


class HalfLine(Family):
    """Path ``0 - 1 - 2 - ...``.

    ``weights="example"``: ``a([n-1, n]) = n`` and ``w(n-1) = 1/n``.
    ``weights="unit"``: ``w = a = 1``.  Potential is the constant ``q``.
    """

    name = "halfline"
    allowed = ("weights", "q")

    def _check(self, params):
        params.setdefault("weights", "example")
        params.setdefault("q", 0.0)
        if params["weights"] not in ("example", "unit"):
            raise ValueError("halfline weights must be 'example' or 'unit'")
        params["q"] = float(params["q"])
        return params

    @property
    def _example(self):
        return self.params["weights"] == "example"

    def generate(self, radius):
        if radius < 1:
            raise ValueError("truncation radius must be >= 1")
        n = radius + 1
        xs = np.arange(n)
        if self._example:
            w_exact = tuple(Fraction(1, x + 1) for x in range(n))
            a_exact = tuple(Fraction(k) for k in range(1, n))
        else:
            w_exact = (Fraction(1),) * n
            a_exact = (Fraction(1),) * (n - 1)
        return MagneticGraph.build(
            ids=[str(x) for x in xs],
            w=[float(v) for v in w_exact],
            q=np.full(n, self.params["q"]),
            origin=xs[:-1],
            terminus=xs[1:],
            a=[float(v) for v in a_exact],
            root=0,
            truncation_radius=radius,
            family=self.name,
            params=dict(self.params),
            w_exact=w_exact,
            a_exact=a_exact,
        )

    def layer_degree(self, r):
        return 1 if r == 0 else 2

    def layer_inward_degree(self, r):
        return 0 if r == 0 else 1

    def layer_a_over_w(self, r):
        # vertex r touches [r-1, r] (a = r) and [r, r+1] (a = r+1); w(r) = 1/(r+1)
        if self._example:
            return Fraction((r + 1) ** 2)
        return Fraction(1)

    def bounded_degree(self):
        return 2, True

    def weight_constant(self):
        return not self._example

    def q_lower_bound(self):
        return self.params["q"]

    def assumption_a_limit(self):
        # m_K = 2, a_K = (K+1)^2 (example) or 1 (unit)
        return Fraction(2) if self._example else Fraction(0)

    def sphere_distance(self, n):
        if self._example:
            return math.fsum(1.0 / math.sqrt((k + 1) * (k + 2)) for k in range(n))
        return float(n)

    def completeness(self):
        if self._example:
            return True, ("d(0,K) = sum_{n<K} 1/sqrt((n+1)(n+2)) >= sum_{n<K} 1/(n+2), "
                          "a divergent harmonic tail; all vertices lie on one ray")
        return True, "unit edge lengths: d(0,K) = K"

    def reference_classification(self):
        if self._example and self.params["q"] == 0.0:
            return {"1": False, "2": False, "3": True}
        return None


class Triangular(Family):
    """Row ``k`` holds ``k`` vertices; consecutive rows are completely joined.

    ``a = 1`` and ``w(x) = k**-0.5`` for ``x`` in row ``k``; the root is the
    single row-1 vertex, so hop distance ``r`` is row ``r + 1``.
    """

    name = "triangular"
    allowed = ("q",)

    def _check(self, params):
        params.setdefault("q", 0.0)
        params["q"] = float(params["q"])
        return params

    def generate(self, radius):
        if radius < 1:
            raise ValueError("truncation radius must be >= 1")
        rows = radius + 1
        starts = np.concatenate([[0], np.cumsum(np.arange(1, rows + 1))])
        n = int(starts[-1])
        row_of = np.repeat(np.arange(1, rows + 1), np.arange(1, rows + 1))
        origin, terminus = [], []
        for k in range(1, rows):
            here = np.arange(starts[k - 1], starts[k])
            nxt = np.arange(starts[k], starts[k + 1])
            origin.append(np.repeat(here, len(nxt)))
            terminus.append(np.tile(nxt, len(here)))
        origin = np.concatenate(origin)
        terminus = np.concatenate(terminus)
        return MagneticGraph.build(
            ids=[f"x{i}" for i in range(n)],
            w=row_of.astype(float) ** -0.5,
            q=np.full(n, self.params["q"]),
            origin=origin,
            terminus=terminus,
            a=np.ones(len(origin)),
            root=0,
            truncation_radius=radius,
            family=self.name,
            params=dict(self.params),
            a_exact=None,
        )

    def layer_degree(self, r):
        k = r + 1
        return (k - 1) + (k + 1)

    def layer_inward_degree(self, r):
        return r

    def layer_a_over_w(self, r):
        return math.sqrt(r + 1)

    def bounded_degree(self):
        return None, True

    def weight_constant(self):
        return False

    def q_lower_bound(self):
        return self.params["q"]

    def assumption_a_limit(self):
        # (2K+2) sqrt(K+1) / K^2 -> 0
        return Fraction(0)

    def sphere_distance(self, n):
        # crossing row k -> k+1 costs (k+1)^(-1/4); every path crosses each once
        return math.fsum((k + 1) ** -0.25 for k in range(1, n + 1))

    def completeness(self):
        return True, ("every path from row 1 to row n+1 crosses each row transition, "
                      "so d >= sum_{k<=n} (k+1)^(-1/4), which diverges")

    def reference_classification(self):
        if self.params["q"] == 0.0:
            return {"1": False, "2": True, "3": False}
        return None


class Cycle(Family):
    """``n``-cycle with total flux ``flux`` spread as phase ``exp(i flux/n)`` per edge."""

    name = "cycle"
    allowed = ("n", "flux", "q")
    infinite = False

    def _check(self, params):
        params.setdefault("n", 3)
        params.setdefault("flux", 0.0)
        params.setdefault("q", 0.0)
        params["n"] = int(params["n"])
        params["flux"] = float(params["flux"])
        params["q"] = float(params["q"])
        if params["n"] < 3:
            raise ValueError("cycle length must be >= 3")
        return params

    def generate(self, radius=1):
        if radius < 1:
            raise ValueError("truncation radius must be >= 1")
        n = self.params["n"]
        xs = np.arange(n)
        phase = np.exp(1j * self.params["flux"] / n) if self.params["flux"] else 1.0
        return MagneticGraph.build(
            ids=[str(x) for x in xs],
            w=np.ones(n),
            q=np.full(n, self.params["q"]),
            origin=xs,
            terminus=(xs + 1) % n,
            a=np.ones(n),
            sigma=np.full(n, phase, dtype=complex),
            root=0,
            family=self.name,
            params=dict(self.params),
        )

    def bounded_degree(self):
        return 2, True

    def weight_constant(self):
        return True

    def q_lower_bound(self):
        return self.params["q"]


class RandomGraph(Family):
    """Connected Erdos-Renyi graph with random weights, potential and phases.

    Resampled until connected, at most ``max_tries`` times.
    """

    name = "random"
    allowed = ("n", "p", "w_range", "a_range", "q_range", "phases", "seed", "max_tries")
    infinite = False

    def _check(self, params):
        params.setdefault("n", 20)
        params.setdefault("p", 0.2)
        params.setdefault("w_range", (0.1, 10.0))
        params.setdefault("a_range", (0.1, 10.0))
        params.setdefault("q_range", (-5.0, 5.0))
        params.setdefault("phases", True)
        params.setdefault("seed", 0)
        params.setdefault("max_tries", 1000)
        params["n"] = int(params["n"])
        params["p"] = float(params["p"])
        params["seed"] = int(params["seed"])
        for key in ("w_range", "a_range", "q_range"):
            lo, hi = (float(v) for v in params[key])
            if hi < lo:
                raise ValueError(f"{key} must be (low, high)")
            params[key] = (lo, hi)
        if params["n"] < 2:
            raise ValueError("random graph needs at least 2 vertices")
        if not 0.0 < params["p"] <= 1.0:
            raise ValueError("edge probability must lie in (0, 1]")
        if params["w_range"][0] <= 0 or params["a_range"][0] <= 0:
            raise ValueError("weight ranges must be positive")
        return params

    def generate(self, radius=1):
        p = self.params
        n = p["n"]
        rng = np.random.default_rng(p["seed"])
        iu, ju = np.triu_indices(n, k=1)
        for _ in range(p["max_tries"]):
            keep = rng.random(len(iu)) < p["p"]
            origin, terminus = iu[keep], ju[keep]
            if _connected(n, origin, terminus):
                break
        else:
            raise ValueError(f"no connected sample in {p['max_tries']} tries; raise p")
        m = len(origin)
        w = rng.uniform(*p["w_range"], size=n)
        q = rng.uniform(*p["q_range"], size=n)
        a = rng.uniform(*p["a_range"], size=m)
        if p["phases"]:
            sigma = np.exp(1j * rng.uniform(0.0, 2 * np.pi, size=m))
        else:
            sigma = np.ones(m, dtype=complex)
        return MagneticGraph.build(
            ids=[str(x) for x in range(n)], w=w, q=q, origin=origin,
            terminus=terminus, a=a, sigma=sigma, root=0,
            family=self.name, params=dict(p),
        )

    def bounded_degree(self):
        return None, False


def _connected(n, origin, terminus):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = n
    for x, y in zip(origin.tolist(), terminus.tolist()):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry
            comps -= 1
    return comps == 1


_REGISTRY = {cls.name: cls for cls in (HalfLine, Triangular, Cycle, RandomGraph)}


def make_family(name: str, **params) -> Family:
    try:
        cls = _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown family {name!r}; choose from {FAMILIES}") from None
    return cls(**params)


def gen_family(family: str, params: dict | None = None, truncation_radius: int = 1) -> MagneticGraph:
    """Materialize a family to the given radius (finite families ignore it)."""
    if truncation_radius < 1:
        raise ValueError("truncation radius must be >= 1")
    return make_family(family, **(params or {})).generate(truncation_radius)
