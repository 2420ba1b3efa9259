import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from magschro import (MagneticGraph, TruncationError, completeness_profile, dist,
                      edge_length, gen_family, make_family, metric_ball, phi_n, psi_R)
from magschro.metric import (check_phi_properties, check_psi_properties, distances_from,
                             edge_lengths)


def test_edge_length_formula():
    g = MagneticGraph.build(ids="xy", w=[2.0, 8.0], q=[0, 0], origin=[0], terminus=[1],
                            a=[0.5])
    assert edge_length(g, "x", "y") == pytest.approx(2.0)
    assert edge_lengths(g) == pytest.approx([2.0])


def test_halfline_lengths_and_first_distances():
    g = gen_family("halfline", {}, 5)
    L = edge_lengths(g)
    assert L == pytest.approx([1 / math.sqrt((n + 1) * (n + 2)) for n in range(5)], rel=1e-15)
    assert dist(g, "0", "2") == pytest.approx(1 / math.sqrt(2) + 1 / math.sqrt(6), abs=1e-12)


@pytest.mark.parametrize("seed", range(6))
def test_dijkstra_against_path_enumeration(seed):
    g = gen_family("random", {"n": 9, "p": 0.4, "seed": seed})
    d = distances_from(g, [0])
    brute = [oracles.path_enum_dist(g, 0, y) for y in range(g.n_vertices)]
    assert d == pytest.approx(brute, rel=1e-13)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_dijkstra_against_heap_oracle(seed):
    g = gen_family("random", {"n": 40, "p": 0.12, "seed": seed})
    x0 = seed % g.n_vertices
    assert distances_from(g, [x0]) == pytest.approx(oracles.heap_dijkstra(g, x0), rel=1e-13)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_metric_axioms(seed):
    g = gen_family("random", {"n": 12, "p": 0.3, "seed": seed})
    D = np.vstack([distances_from(g, [x]) for x in range(g.n_vertices)])
    assert np.allclose(D, D.T, rtol=1e-13)
    assert np.all(np.diag(D) == 0)
    via = D[:, :, None] + D[None, :, :]  # via[x, y, z] = d(x, y) + d(y, z)
    assert np.all(D[:, None, :] <= via + 1e-12)


def test_multi_source_is_min():
    g = gen_family("random", {"n": 30, "p": 0.15, "seed": 3})
    both = distances_from(g, [0, 5])
    assert both == pytest.approx(np.minimum(distances_from(g, [0]), distances_from(g, [5])))


def test_metric_ball():
    g = gen_family("halfline", {}, 30)
    d = distances_from(g, [0])
    assert list(metric_ball(g, "0", 1.5)) == list(np.flatnonzero(d <= 1.5))
    with pytest.raises(ValueError):
        metric_ball(g, "0", -1)


@pytest.mark.parametrize("family, params, radius", [
    ("halfline", {}, 120), ("triangular", {}, 14), ("cycle", {"n": 9}, 1),
])
@pytest.mark.parametrize("n", [1, 2, 3, 7])
def test_phi_properties(family, params, radius, n):
    g = gen_family(family, params, radius)
    props = check_phi_properties(g, phi_n(g, g.root, n))
    assert all(v for k, v in props.items() if k != "max_gradient"), props
    assert props["max_gradient"] <= 1 / n


def test_phi_rejects_bad_n():
    g = gen_family("halfline", {}, 4)
    with pytest.raises(ValueError):
        phi_n(g, "0", 0)


@pytest.mark.parametrize("R", [0.0, 0.3, 1.0, 2.5])
def test_psi_properties_halfline(R):
    g = gen_family("halfline", {}, 39)
    props = check_psi_properties(g, psi_R(g, "0", R))
    assert all(v for k, v in props.items() if k != "max_lipschitz_excess"), props


def test_psi_pairwise_against_brute_force_lipschitz():
    g = gen_family("random", {"n": 9, "p": 0.4, "seed": 1})
    cut = psi_R(g, 0, 0.2)
    for x, y in oracles.all_pairs(range(g.n_vertices)):
        assert abs(cut.values[x] - cut.values[y]) <= oracles.path_enum_dist(g, x, y) + 1e-12


def test_psi_truncation_boundary():
    g = gen_family("halfline", {}, 4)
    with pytest.raises(TruncationError):
        psi_R(g, "0", 5.0)


def test_psi_empty_complement():
    g = gen_family("cycle", {"n": 3})
    with pytest.raises(TruncationError):
        psi_R(g, "0", 10.0)


def test_halfline_profile_matches_closed_form():
    prof = completeness_profile(make_family("halfline"), max_n=30)
    assert prof.min_dist == pytest.approx(prof.closed_form, abs=1e-12)
    assert prof.closed_form == pytest.approx(list(oracles.halfline_partial_sums(30)), abs=1e-13)
    assert all(prof.stabilized)


def test_triangular_profile_matches_closed_form():
    prof = completeness_profile(make_family("triangular"), max_n=8)
    expected = [math.fsum((k + 1) ** -0.25 for k in range(1, n + 1)) for n in range(9)]
    assert prof.min_dist == pytest.approx(expected, abs=1e-12)
    assert prof.closed_form == pytest.approx(expected, abs=1e-14)


def test_profile_on_finite_graph_and_margin():
    g = gen_family("cycle", {"n": 8})
    prof = completeness_profile(g, max_n=10)
    assert prof.n == [0, 1, 2, 3, 4] and prof.closed_form is None
    with pytest.raises(ValueError):
        completeness_profile(g, margin=0)
