import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bwb.spaces import (DirectSum, DiscreteLp, FiniteCK, Lp, PolytopeByFacets,
                        PolytopeByGenerators, Pullback, Quotient, batch_eval,
                        eps_net, eval_norm, kernel_basis, quotient_norm)


def test_lp_norms():
    assert eval_norm(Lp(1, 2), [3, -4]) == 7.0
    assert eval_norm(Lp(2, 2), [3, 4]) == pytest.approx(5.0)
    assert eval_norm(Lp(math.inf, 3), [1, -9, 2]) == 9.0
    assert eval_norm(Lp(3, 1), [-2]) == pytest.approx(2.0)


def test_polytope_generators_gauge():
    # conv(+-e1, +-e2) is the l1 ball
    diamond = PolytopeByGenerators(((1, 0), (0, 1)), 2)
    for v in ([1, 0], [0.5, 0.5], [-0.25, 0.75], [2, 1]):
        assert eval_norm(diamond, v) == pytest.approx(eval_norm(Lp(1, 2), v), abs=1e-10)


def test_polytope_facets_is_sup_of_functionals():
    cube = PolytopeByFacets(((1, 0), (0, 1)), 2)
    for v in ([1, 0], [0.5, -0.7], [2, 2]):
        assert eval_norm(cube, v) == pytest.approx(eval_norm(Lp(math.inf, 2), v), abs=1e-12)


def test_pullback_and_direct_sum():
    # pullback of l1 under a diagonal scaling
    scaled = Pullback(((2, 0), (0, 3)), Lp(1, 2))
    assert eval_norm(scaled, [1, 1]) == pytest.approx(5.0)
    s = DirectSum(1, (Lp(1, 2), Lp(math.inf, 2)))
    assert eval_norm(s, [1, 1, 2, -3]) == pytest.approx(2 + 3)
    sup_sum = DirectSum(0, (Lp(1, 2), Lp(1, 2)))
    assert eval_norm(sup_sum, [1, 1, 2, -3]) == pytest.approx(5.0)


def test_quotient_norm_oracles():
    # dist in linf^2 from e1 to span{(1,1)} is 1/2
    q = Quotient(Lp(math.inf, 2), ((1.0, 1.0),))
    assert eval_norm(q, [1, 0]) == pytest.approx(0.5, abs=1e-9)
    # dist in l1^2 from e1 to span{(1,1)} is 1 (attained on a segment)
    q1 = Quotient(Lp(1, 2), ((1.0, 1.0),))
    assert eval_norm(q1, [1, 0]) == pytest.approx(1.0, abs=1e-9)
    val, z = quotient_norm(Lp(math.inf, 2), ((1.0, 1.0),), [1, 0])
    assert val == pytest.approx(0.5, abs=1e-9)
    assert eval_norm(Lp(math.inf, 2), np.array([1, 0]) - z) == pytest.approx(val, abs=1e-8)


def test_discrete_lp_and_finite_ck():
    d = DiscreteLp(2.0, (4.0, 1.0))
    assert eval_norm(d, [1, 2]) == pytest.approx(math.sqrt(4 + 4))
    ck = FiniteCK(((1.0, 0.0), (0.5, 0.5)))
    assert eval_norm(ck, [2, 2]) == pytest.approx(2.0)


def test_degenerate_detection():
    rank_deficient = FiniteCK(((1.0, 1.0),))  # one functional on R^2
    ker = kernel_basis(rank_deficient)
    assert ker.shape[0] == 1


def test_eps_net_mesh_and_sphere():
    for spec in (Lp(1, 2), Lp(2, 3), Lp(math.inf, 2)):
        net = eps_net(spec, 0.2)
        assert net.mesh <= 0.2
        for p in net.points[:20]:
            assert eval_norm(spec, p) == pytest.approx(1.0, abs=1e-9)


def test_batch_eval_matches_scalar():
    rng = np.random.default_rng(0)
    specs = [Lp(1, 3), Lp(math.inf, 3), Lp(2.5, 3),
             PolytopeByFacets(((1, 0, 0), (0, 1, 1), (1, -1, 0)), 3),
             PolytopeByGenerators(((1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)), 3),
             Pullback(((1, 0, 0), (0, 2, 0), (0, 0, 1)), Lp(2, 3))]
    pts = rng.standard_normal((20, 3))
    for spec in specs:
        vals = batch_eval(spec, pts)
        for v, p in zip(vals, pts):
            assert v == pytest.approx(spec.eval(p), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=2, max_size=2),
       st.lists(st.floats(-10, 10), min_size=2, max_size=2),
       st.floats(0.01, 100))
def test_norm_axioms_polytopal(x, y, c):
    spec = PolytopeByGenerators(((1, 0), (0.5, 1), (-0.25, 0.75)), 2)
    x, y = np.array(x), np.array(y)
    nx, ny = spec.eval(x), spec.eval(y)
    assert spec.eval(x + y) <= nx + ny + 1e-9 * (1 + nx + ny)
    assert spec.eval(c * x) == pytest.approx(c * nx, rel=1e-9, abs=1e-12)


def test_vertex_facet_polarity():
    diamond = PolytopeByGenerators(((1, 0), (0, 1)), 2)
    verts = diamond.ball_vertices()
    assert sorted(map(tuple, np.round(verts, 9))) == [(-1.0, 0.0), (0.0, -1.0),
                                                      (0.0, 1.0), (1.0, 0.0)]
    facets = diamond.ball_facets()
    # all vertices on the boundary of every facet description
    assert np.max(np.abs(facets @ verts.T)) == pytest.approx(1.0, abs=1e-9)
