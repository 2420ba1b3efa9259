import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from magschro import (MagneticGraph, assemble, ball, d_sigma, delta_sigma, edge_value,
                      gen_family, indicator, inner_e, inner_v, laplacian_sigma,
                      physical_laplacian, schrodinger, support, vertex_field)


@pytest.fixture(scope="module")
def rg():
    return gen_family("random", {"n": 40, "p": 0.12, "seed": 11})


def test_laplacian_matches_loop_oracle(rg):
    rng = np.random.default_rng(0)
    u, _, _ = oracles.random_fields(rng, rg.n_vertices, rg.n_edges)
    assert np.allclose(laplacian_sigma(rg, u), oracles.laplacian_loop(rg, u),
                       rtol=1e-13, atol=1e-12)


def test_d_and_delta_match_loops(rg):
    rng = np.random.default_rng(1)
    u, _, Y = oracles.random_fields(rng, rg.n_vertices, rg.n_edges)
    assert np.allclose(d_sigma(rg, u), oracles.d_sigma_loop(rg, u), atol=1e-14)
    assert np.allclose(delta_sigma(rg, Y), oracles.delta_sigma_loop(rg, Y), atol=1e-12)


def test_schrodinger_adds_potential(rg):
    u = np.arange(rg.n_vertices, dtype=complex)
    assert np.allclose(schrodinger(rg, u) - laplacian_sigma(rg, u), rg.q * u)


def test_physical_laplacian_ignores_phase(rg):
    plain = rg.replace(sigma=np.ones(rg.n_edges, dtype=complex))
    u = np.linspace(-1, 1, rg.n_vertices) + 0.5j
    assert np.allclose(physical_laplacian(rg, u), laplacian_sigma(plain, u))


def test_restrict_to_zeroes_outside():
    g = gen_family("halfline", {}, 6)
    u = np.arange(1, g.n_vertices + 1) ** 2 + 0j
    out = laplacian_sigma(g, u, restrict_to=ball(g, "0", 2))
    assert np.all(out[3:] == 0)
    assert np.array_equal(out[:3], laplacian_sigma(g, u)[:3]) and np.all(out[:3] != 0)


def test_delta_of_indicator_on_single_edge():
    # one edge [0,1], sigma = i, a = 2, w = (1, 4)
    g = MagneticGraph.build(ids="xy", w=[1, 4], q=[0, 0], origin=[0], terminus=[1],
                            a=[2.0], sigma=[1j])
    out = delta_sigma(g, np.array([1.0 + 0j]))
    assert out == pytest.approx([-2.0, 1j * 2 / 4])


def test_twisted_antisymmetry_of_d_sigma(rg):
    """Re-storing an edge reversed gives ``(d_sigma u)(e^) = -sigma(e) (d_sigma u)(e)``."""
    rng = np.random.default_rng(2)
    u = rng.normal(size=rg.n_vertices) + 1j * rng.normal(size=rg.n_vertices)
    flipped = rg.replace(origin=rg.terminus, terminus=rg.origin, sigma=np.conj(rg.sigma))
    assert np.allclose(d_sigma(flipped, u), -rg.sigma * d_sigma(rg, u), atol=1e-14)
    # the operator itself does not depend on the stored orientation
    assert np.allclose(laplacian_sigma(flipped, u), laplacian_sigma(rg, u), atol=1e-12)


def test_edge_value_reverse_lookup():
    g = MagneticGraph.build(ids="xyz", w=[1, 1, 1], q=[0, 0, 0], origin=[0, 1],
                            terminus=[1, 2], a=[1, 1])
    Y = np.array([2 + 1j, 3.0])
    assert edge_value(g, Y, "x", "y") == 2 + 1j
    assert edge_value(g, Y, "y", "x") == -(2 + 1j)


def test_field_helpers(rg):
    f = vertex_field(rg, {"3": 2.0, "5": 1j})
    assert list(support(f)) == [3, 5]
    assert inner_v(rg, indicator(rg, "3"), indicator(rg, "3")) == pytest.approx(rg.w[3])
    Y = np.zeros(rg.n_edges, dtype=complex)
    Y[0] = 1
    assert inner_e(rg, Y, Y) == pytest.approx(rg.a[0])


def test_assemble_matches_dense_oracle(rg):
    b = ball(rg, rg.root, 2)
    op = assemble(rg, b)
    M = oracles.dense_matrix(rg, b.vertices)
    assert np.allclose(op.matrix.toarray(), M, atol=1e-13)
    S = op.symmetric.toarray()
    assert np.allclose(S, S.conj().T, atol=0)
    D = np.sqrt(rg.w[b.vertices])
    assert np.allclose(S, D[:, None] * M / D[None, :], atol=1e-12)


def test_assemble_action_equals_operator_on_ball_supported_fields(rg):
    b = ball(rg, rg.root, 2)
    op = assemble(rg, b)
    rng = np.random.default_rng(4)
    u = np.zeros(rg.n_vertices, dtype=complex)
    u[b.vertices] = rng.normal(size=len(b)) + 1j * rng.normal(size=len(b))
    assert np.allclose(op.matrix @ u[b.vertices], schrodinger(rg, u)[b.vertices], atol=1e-12)


def test_halfline_ball_zero_is_one_by_one():
    g = gen_family("halfline", {}, 3)
    op = assemble(g, ball(g, "0", 0))
    assert op.matrix.toarray().tolist() == [[1.0]]


def test_assemble_rejects_empty_ball(rg):
    from magschro.graph import Ball
    empty = Ball(0, 0, np.array([], dtype=np.int64), np.array([], dtype=np.int64),
                 np.array([], dtype=np.int64))
    with pytest.raises(ValueError):
        assemble(rg, empty)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(2, 30))
def test_laplacian_oracle_property(seed, n):
    g = gen_family("random", {"n": n, "p": 0.3, "seed": seed})
    rng = np.random.default_rng(seed)
    u = rng.normal(size=n) + 1j * rng.normal(size=n)
    assert np.allclose(laplacian_sigma(g, u), oracles.laplacian_loop(g, u),
                       rtol=1e-12, atol=1e-11)
