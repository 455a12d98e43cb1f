import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bwb.charact import (clarkson_gap, lp_atom_obstruction_check,
                         lp_atom_threshold, lp_nonsplit_verify,
                         lp_nonsplit_witness, lp_split, parallelogram_defect,
                         parallelogram_residual, qsl_check)
from bwb.spaces import DiscreteLp, Lp, Pullback


def test_clarkson_sign_and_vanishing():
    for p in (1.0, 1.5, 3.0, 4.0):
        sign = -1.0 if p < 2 else 1.0
        for z in np.linspace(-2, 2, 41):
            for w in np.linspace(-2, 2, 41):
                g = clarkson_gap(z, w, p)
                assert sign * g >= -1e-10
                if abs(z * w) < 1e-14:
                    assert abs(g) < 1e-10


def test_clarkson_rejects_p2():
    with pytest.raises(ValueError):
        clarkson_gap(1.0, 1.0, 2.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3),
       st.sampled_from([1.0, 1.3, 2.5, 4.0]))
def test_clarkson_symmetries(z, w, p):
    g = clarkson_gap(z, w, p)
    assert g == pytest.approx(clarkson_gap(w, z, p), abs=1e-9)
    assert g == pytest.approx(clarkson_gap(-z, -w, p), abs=1e-9)


def test_parallelogram_euclidean_zero():
    for n in range(2, 7):
        res = parallelogram_defect(Lp(2, n), seed=0)
        assert res["max_residual"] <= 1e-12


def test_parallelogram_orthogonal_pullback_zero():
    rng = np.random.default_rng(1)
    A = np.linalg.qr(rng.standard_normal((4, 4)))[0]
    spec = Pullback(tuple(map(tuple, A)), Lp(2, 4))
    assert parallelogram_defect(spec, seed=0)["max_residual"] <= 1e-12


def test_parallelogram_oracle_values():
    assert parallelogram_residual(Lp(1, 2), [1, 0], [0, 1]) == pytest.approx(4.0)
    # sup over the unit sphere of l_inf^2 is 4, attained at (1,1), (1,-1);
    # the coordinate pairs alone already give 2
    res = parallelogram_defect(Lp(math.inf, 2), seed=0)
    assert 2.0 - 1e-9 <= res["max_residual"] <= 4.0 + 1e-9
    exact = parallelogram_residual(Lp(math.inf, 2), [1, 1], [1, -1])
    assert exact == pytest.approx(4.0)


def test_lp_split_residual_zero():
    rng = np.random.default_rng(2)
    for p in (1.0, 3.0):
        for N in (2, 4):
            x = rng.standard_normal(64)
            w = rng.uniform(0.5, 2.0, 64)
            x = x / DiscreteLp(p, tuple(w)).eval(x)
            res = lp_split(x, w, p, N)
            assert res.residual <= 1e-12
            # pieces have disjoint supports and equal norms
            supp = res.pieces != 0
            assert np.max(supp.sum(axis=0)) <= 1
            assert np.allclose(res.piece_norms, res.piece_norms[0], atol=1e-9)


def test_lp_split_sum_identity():
    x = np.full(8, 0.125)
    res = lp_split(x, np.ones(8), 1.0, 2)
    total = res.pieces.sum(axis=0)
    target = 2.0 * res.refined_vector  # N^{1/p} x with p = 1
    assert np.allclose(total, target, atol=1e-12)


def test_atom_threshold_values():
    assert lp_atom_threshold(1.0) == pytest.approx(math.sqrt(2) - 1, abs=1e-10)
    # p > 2: root of (1+e)^p (2 (1+e)^p + 2) = 2^p
    e4 = lp_atom_threshold(4.0)
    assert (1 + e4) ** 4 * (2 * (1 + e4) ** 4 + 2) == pytest.approx(2 ** 4, abs=1e-8)
    # p = 2 has no obstruction scale
    with pytest.raises(ValueError):
        lp_atom_threshold(2.0)


def test_atom_obstruction_p1():
    res = lp_atom_obstruction_check(1.0, 0.1, seed=0)
    assert res["obstructed"] is True
    assert res["best_distortion_lower"] > 1.1


def test_atom_obstruction_requires_small_eps():
    with pytest.raises(ValueError):
        lp_atom_obstruction_check(1.0, 0.9, seed=0)


def test_nonsplit_witness_shape():
    res = lp_nonsplit_witness([1.0, 0.0, 0.0], 1.0, 0.5)
    assert res["N"] == 7
    assert 0 < res["eta"] < 1
    assert lp_nonsplit_verify([1.0, 0.0, 0.0], 1.0, 0.5, res, seed=0) is True


def test_qsl_hadamard_contraction():
    M = np.array([[0.5, 0.5], [0.5, -0.5]])
    vectors = np.eye(2)
    res = qsl_check(M, vectors, Lp(1, 2), 1.0, seed=0)
    assert res["hypothesis_certified"] is True
    assert res["verdict"] is True
    assert res["worst_residual"] <= 1e-6


def test_qsl_uncertified_when_expanding():
    M = np.array([[1.0, 1.0], [1.0, -1.0]])
    res = qsl_check(M, np.eye(2), Lp(1, 2), 1.0, seed=0)
    assert res["hypothesis_certified"] is False
    assert res["verdict"] is None
