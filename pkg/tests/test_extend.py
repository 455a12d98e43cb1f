import math

import numpy as np
import pytest

from bwb.extend import (ExtensionProblem, check_cond2, check_cond3,
                        gamma_extend, kappa_sequence)
from bwb.spaces import Lp, PolytopeByGenerators


def test_kappa_sequence_shape():
    ks = kappa_sequence(0.5, 4)
    assert len(ks) == 4
    assert all(ks[i] < ks[i + 1] for i in range(3))
    assert 0.5 <= ks[0] and ks[-1] < 1


def test_problem_validation():
    # norm does not take value 1 on basis vectors
    bad = PolytopeByGenerators(((2.0, 0.0), (0.0, 1.0)), 2)
    with pytest.raises(ValueError):
        ExtensionProblem(2, bad, np.array([0.1, 0.1]), 0.5)
    with pytest.raises(ValueError):
        # functional not dominated by the norm
        ExtensionProblem(2, Lp(math.inf, 2), np.array([1.0, 1.0]), 0.5)


def test_gamma_calibration_identity():
    # gamma_k(nu) = eta * z*(e_k) by construction of the calibration
    problem = ExtensionProblem(2, Lp(1, 2), np.array([1.0, 0.5]), 0.5)
    table = gamma_extend(problem, problem.nu)
    assert table.values[0] == pytest.approx(0.5 * 1.0, abs=1e-12)
    assert table.values[1] == pytest.approx(0.5 * 0.5, abs=1e-10)
    assert table.residual_cond1 <= 1e-10


def test_gamma_within_uv_bracket():
    problem = ExtensionProblem(3, Lp(1, 3), np.array([0.8, -0.3, 0.4]), 0.4)
    mu = Lp(math.inf, 3)
    table = gamma_extend(problem, mu)
    for k in range(1, 3):
        assert table.u_values[k] - 1e-9 <= table.values[k] <= table.v_values[k] + 1e-9


def test_cond2_and_cond3_small_instance():
    problem = ExtensionProblem(2, Lp(1, 2), np.array([1.0, 0.5]), 0.5)
    mu = Lp(math.inf, 2)
    tmu = gamma_extend(problem, mu)
    tnu = gamma_extend(problem, problem.nu)
    for k in (1, 2):
        assert check_cond2(problem, mu, tmu, k) <= 1e-6
        assert check_cond3(problem, mu, problem.nu, tmu, tnu, k) <= 1e-4


def _random_b1_instance(rng, n):
    """A norm with value exactly 1 on every basis vector, and a dominated
    functional."""
    kind = rng.integers(0, 3)
    if kind == 0:
        nu = Lp(1, n)
    elif kind == 1:
        nu = Lp(math.inf, n)
    else:
        extra = rng.uniform(-1, 1, size=n)
        extra[np.argmax(np.abs(extra))] = np.sign(extra[np.argmax(np.abs(extra))])
        gens = tuple(map(tuple, np.vstack([np.eye(n), extra])))
        nu = PolytopeByGenerators(gens, n)
    z = rng.standard_normal(n)
    z = z / (np.sum(np.abs(z)) * rng.uniform(1.0, 2.0))  # ||z||_1 <= 1 <= nu*
    eta = rng.uniform(0.2, 0.8)
    return ExtensionProblem(n, nu, z, eta)


def test_random_instances_conditions():
    rng = np.random.default_rng(42)
    for _ in range(5):
        n = int(rng.integers(2, 4))
        problem = _random_b1_instance(rng, n)
        mu = Lp(math.inf, n) if rng.random() < 0.5 else Lp(1, n)
        table = gamma_extend(problem, mu)
        tnu = gamma_extend(problem, problem.nu)
        assert tnu.residual_cond1 <= 1e-10
        for k in range(1, n + 1):
            assert check_cond2(problem, mu, table, k) <= 1e-4
            assert check_cond3(problem, mu, problem.nu, table, tnu, k) <= 1e-4
