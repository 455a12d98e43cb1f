import math
from fractions import Fraction

import numpy as np
import pytest

from bwb.coding import (ABSTAIN, Interval, PseudonormCode, pseudonorm_eval,
                        rationalize_norm, reduce_to_B, rho_of_K,
                        sigma_of_lambda, subbasic_member)
from bwb.spaces import DiscreteLp, FiniteCK, Lp


def test_pseudonorm_eval_matches_host():
    code = PseudonormCode(Lp(1, 2), ((1.0, 0.0), (0.0, 1.0), (1.0, 1.0)))
    assert pseudonorm_eval(code, [1, 0, 0]) == pytest.approx(1.0)
    assert pseudonorm_eval(code, [0, 0, 1]) == pytest.approx(2.0)
    assert pseudonorm_eval(code, [1, 1, -1]) == pytest.approx(0.0, abs=1e-12)


def test_subbasic_member_bands():
    code = PseudonormCode(Lp(1, 2), ((1.0, 0.0),))
    assert subbasic_member(code, [1.0], Interval(0.5, 1.5)) is True
    assert subbasic_member(code, [1.0], Interval(2.0, 3.0)) is False
    assert subbasic_member(code, [1.0], Interval(1.0 - 1e-12, 2.0)) is ABSTAIN


def test_reduce_recovers_planted_selection():
    # images 1, 2 independent; 3 = combination; 4 independent again
    code = PseudonormCode(Lp(1, 3), ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0),
                                     (1.0, -2.0, 0.0), (0.0, 0.0, 1.0)))
    res = reduce_to_B(code)
    assert res["selection"] == [1, 2, 4]
    assert res["truncation_incomplete"] is False
    # the reduced code evaluates identically on the selected block
    sub = res["code"]
    v = np.array([0.3, -0.7, 1.1])
    full = np.zeros(4)
    full[[0, 1, 3]] = v
    assert pseudonorm_eval(sub, v) == pytest.approx(pseudonorm_eval(code, full))


def test_reduce_random_planted():
    rng = np.random.default_rng(5)
    for _ in range(20):
        dim = 3
        total = 6
        selection = sorted(rng.choice(range(total), size=dim, replace=False))
        images, chosen = [], []
        for i in range(total):
            if i in selection:
                while True:
                    v = rng.standard_normal(dim)
                    if not chosen or np.linalg.matrix_rank(
                            np.array(chosen + [v]), tol=1e-6) == len(chosen) + 1:
                        break
                chosen.append(v)
                images.append(v)
            else:
                coeffs = rng.standard_normal(len(chosen)) if chosen else []
                images.append(np.array(chosen).T @ coeffs if chosen else np.zeros(dim))
        code = PseudonormCode(Lp(1, dim), tuple(map(tuple, images)))
        res = reduce_to_B(code)
        assert res["selection"] == [i + 1 for i in selection]


def test_truncation_incomplete_flag():
    code = PseudonormCode(Lp(1, 3), ((1.0, 0.0, 0.0), (2.0, 0.0, 0.0)))
    res = reduce_to_B(code)
    assert res["selection"] == [1]
    assert res["truncation_incomplete"] is True


def test_rho_of_K_host():
    code = rho_of_K([[0.0], [1.0]], [[1.0, 2.0]])
    assert isinstance(code.host, FiniteCK)
    assert code.truncation == 1


def test_sigma_of_lambda_host():
    code = sigma_of_lambda([0.5, 0.5], [[1.0, 0.5]], 2.0)
    assert isinstance(code.host, DiscreteLp)


def test_rationalize_norm_exact_rationals():
    code = PseudonormCode(Lp(2, 2), ((1.0, 0.0), (0.0, 1.0)))
    probes = np.eye(2)
    res = rationalize_norm(code, probes, 0.05)
    for q in res["values"]:
        assert isinstance(q, Fraction)
    assert res["max_probe_error"] <= 1e-12
    for q in res["values"]:
        assert 1.0 <= float(q) < 1.05


def test_rationalize_respects_triangle_inequality():
    rng = np.random.default_rng(7)
    code = PseudonormCode(Lp(1, 3), tuple(map(tuple, rng.standard_normal((3, 3)))))
    probes = np.vstack([np.eye(3), rng.standard_normal((3, 3))])
    res = rationalize_norm(code, probes, 0.1)
    ext = res["code"]
    mu = lambda v: pseudonorm_eval(ext, v)
    for _ in range(20):
        x, y = rng.standard_normal(3), rng.standard_normal(3)
        assert mu(x + y) <= mu(x) + mu(y) + 1e-8
        c = rng.uniform(0.1, 3)
        assert mu(c * x) == pytest.approx(c * mu(x), rel=1e-8)
