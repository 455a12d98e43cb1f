"""Acceptance gate: twelve desk-scale criteria, one pass/fail line each.

Every criterion asserts its numeric claims at the pinned tolerance and its
wall-clock budget, and prints a single ``[PASS]``/``[FAIL]`` line (visible
under ``pytest -s`` or in the captured output of a failing run).
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from bwb import charact, coding, embed, extend, maps, szlenk
from bwb.amalgam import amalgamated_sum, verify_pushout
from bwb.serialize import dumps_canonical
from bwb.spaces import (DiscreteLp, Lp, PolytopeByGenerators, Pullback,
                        eval_norm)


def _report(num: int, label: str, ok: bool, elapsed: float, budget: float):
    status = "PASS" if ok and elapsed < budget else "FAIL"
    print(f"[{status}] criterion {num:2d}: {label} "
          f"({elapsed:.2f}s / budget {budget:g}s)")
    assert ok, f"criterion {num} failed: {label}"
    assert elapsed < budget, f"criterion {num} over budget: {elapsed:.2f}s"


def test_criterion_01_clarkson_suite():
    t0 = time.time()
    grid = np.linspace(-2, 2, 200)
    ok = True
    for p in (1.0, 1.5, 3.0, 4.0):
        sign = -1.0 if p < 2 else 1.0
        Z, W = np.meshgrid(grid, grid)
        gaps = (np.abs(Z + W) ** p + np.abs(Z - W) ** p
                - 2 * np.abs(Z) ** p - 2 * np.abs(W) ** p)
        ok &= bool(np.all(sign * gaps >= -1e-10))
        # vanishing exactly on the axes zw = 0
        prod_zero = np.abs(Z * W) < 1e-14
        ok &= bool(np.all(np.abs(gaps[prod_zero]) < 1e-10))
        ok &= bool(np.all(np.abs(gaps[~prod_zero]) > 0))
        # spot-check the vectorized grid against the scalar op
        ok &= abs(charact.clarkson_gap(grid[3], grid[17], p)
                  - gaps[17, 3]) < 1e-12
    _report(1, "Clarkson sign and vanishing on a 200x200 grid", ok,
            time.time() - t0, 1.0)


def test_criterion_02_parallelogram_suite():
    t0 = time.time()
    ok = True
    rng = np.random.default_rng(0)
    for n in range(2, 7):
        ok &= charact.parallelogram_defect(Lp(2, n), seed=0)["max_residual"] <= 1e-12
        Q = np.linalg.qr(rng.standard_normal((n, n)))[0]
        spec = Pullback(tuple(map(tuple, Q)), Lp(2, n))
        ok &= charact.parallelogram_defect(spec, seed=0)["max_residual"] <= 1e-12
    ok &= abs(charact.parallelogram_residual(Lp(1, 2), [1, 0], [0, 1]) - 4.0) <= 1e-12
    ok &= abs(charact.parallelogram_residual(Lp(math.inf, 2), [1, 1], [1, -1])
              - 4.0) <= 1e-12
    defect = charact.parallelogram_defect(Lp(math.inf, 2), seed=0)["max_residual"]
    ok &= 2.0 - 1e-9 <= defect <= 4.0 + 1e-9
    _report(2, "parallelogram defect: 0 on euclidean, 4 / 2 oracles", ok,
            time.time() - t0, 1.0)


def test_criterion_03_szlenk_identity():
    t0 = time.time()
    B = szlenk.TailBudgetSet.unit_ball()
    ok = True
    for eps in (Fraction(1, 8), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
        res = szlenk.c0_predicate(B, eps)
        ok &= res["holds"] is True and res["discrepancy"] == 0
    ok &= szlenk.szlenk_index_at(B, 1) == 3
    ok &= szlenk.summable_check(B)["M"] == 2
    _report(3, "c0 derivation identity, index(B,1)=3, summable M=2", ok,
            time.time() - t0, 1.0)


def _random_budget_set(rng):
    def fr(lo, hi):
        return Fraction(int(rng.integers(lo * 8, hi * 8 + 1)), 8)

    constraints = [(fr(0, 2), [fr(-2, 2)]) for _ in range(int(rng.integers(0, 3)))]
    budget = [(fr(0, 3), [fr(-1, 1)]) for _ in range(int(rng.integers(1, 3)))]
    return szlenk.TailBudgetSet.make(1, constraints, budget)


def test_criterion_04_szlenk_calculus():
    t0 = time.time()
    rng = np.random.default_rng(4)
    ok = True
    for _ in range(50):
        K = _random_budget_set(rng)
        eps = Fraction(int(rng.integers(1, 9)), 8)
        D = szlenk.szlenk_derivative(K, eps)
        ok &= szlenk.contains(K, D)                       # s_eps(K) inside K
        D2 = szlenk.szlenk_derivative(K, 2 * eps)
        ok &= szlenk.contains(D, D2)                      # monotone in eps
        r = Fraction(int(rng.integers(1, 9)), 4)
        lhs = szlenk.szlenk_derivative(K.scaled(r), eps)
        rhs = szlenk.szlenk_derivative(K, eps / r).scaled(r)
        ok &= szlenk.contains(lhs, rhs) and szlenk.contains(rhs, lhs)
        K2 = szlenk.TailBudgetSet(1, K.constraints,
                                  tuple(b.shifted(Fraction(1, 2)) for b in K.budget))
        ok &= szlenk.contains(szlenk.szlenk_derivative(K2, eps), D)  # monotone in K
    _report(4, "Szlenk derivation calculus on 50 random tail-budget sets", ok,
            time.time() - t0, 5.0)


def test_criterion_05_lp_splitting():
    t0 = time.time()
    rng = np.random.default_rng(5)
    ok = True
    for p in (1.0, 3.0):
        for N in (2, 4):
            for _ in range(10):
                w = rng.uniform(0.5, 2.0, 64)
                x = rng.standard_normal(64)
                x = x / DiscreteLp(p, tuple(w)).eval(x)
                res = charact.lp_split(x, w, p, N)
                ok &= res.residual <= 1e-12
                supports = res.pieces != 0
                ok &= int(np.max(supports.sum(axis=0))) <= 1   # disjoint: 1-equivalent to l_p^N
                total = res.pieces.sum(axis=0)
                ok &= bool(np.allclose(total, N ** (1.0 / p) * res.refined_vector,
                                       atol=1e-12))
    _report(5, "equal-mass L_p splitting: residual <= 1e-12, disjoint pieces", ok,
            time.time() - t0, 2.0)


def test_criterion_06_atom_obstruction():
    t0 = time.time()
    ok = True
    r1 = charact.lp_atom_obstruction_check(1.0, 0.1, seed=0, budget=10 ** 5)
    ok &= r1["obstructed"] is True
    r4 = charact.lp_atom_obstruction_check(4.0, 0.05, seed=0, budget=10 ** 5)
    ok &= r4["obstructed"] is True
    ok &= abs(charact.lp_atom_threshold(1.0) - (math.sqrt(2) - 1)) <= 1e-10
    _report(6, "atom obstruction at (p,eps)=(1,0.1),(4,0.05); threshold sqrt(2)-1", ok,
            time.time() - t0, 30.0)


def test_criterion_07_banach_mazur():
    t0 = time.time()
    ok = True
    r = maps.banach_mazur(Lp(1, 2), Lp(math.inf, 2), seed=7)
    ok &= r["upper"] <= 1 + 1e-6
    r2 = maps.banach_mazur(Lp(1, 2), Lp(2, 2), seed=7)
    ok &= r2["lower"] <= math.sqrt(2) + 1e-3 <= r2["upper"] + 2e-3
    ok &= abs(r2["upper"] - math.sqrt(2)) <= 1e-3
    ok &= abs(r2["lower"] - math.sqrt(2)) <= 1e-3
    # symmetry
    r3 = maps.banach_mazur(Lp(math.inf, 2), Lp(1, 2), seed=7, n_starts=16)
    ok &= abs(r3["upper"] - r["upper"]) <= 1e-6
    # sampled multiplicative triangle inequality d(E,G) <= d(E,F) d(F,G)
    rEG = maps.banach_mazur(Lp(1, 2), Lp(2, 2), seed=1, n_starts=16)
    rEF = maps.banach_mazur(Lp(1, 2), Lp(math.inf, 2), seed=1, n_starts=16)
    rFG = maps.banach_mazur(Lp(math.inf, 2), Lp(2, 2), seed=1, n_starts=16)
    ok &= rEG["lower"] <= rEF["upper"] * rFG["upper"] + 1e-6
    _report(7, "Banach-Mazur: (l1,linf) upper 1, (l1,l2) brackets sqrt(2)", ok,
            time.time() - t0, 60.0)


def _random_b1_instance(rng, n):
    kind = rng.integers(0, 3)
    if kind == 0:
        nu = Lp(1, n)
    elif kind == 1:
        nu = Lp(math.inf, n)
    else:
        extra = rng.uniform(-1, 1, size=n)
        j = int(np.argmax(np.abs(extra)))
        extra[j] = math.copysign(1.0, extra[j])
        nu = PolytopeByGenerators(tuple(map(tuple, np.vstack([np.eye(n), extra]))), n)
    z = rng.standard_normal(n)
    z = z / (np.sum(np.abs(z)) * rng.uniform(1.0, 2.0))
    eta = rng.uniform(0.2, 0.8)
    return extend.ExtensionProblem(n, nu, z, eta)


def test_criterion_08_extension_recursion():
    t0 = time.time()
    rng = np.random.default_rng(8)
    ok = True
    for _ in range(20):
        n = int(rng.integers(2, 4))
        problem = _random_b1_instance(rng, n)
        tnu = extend.gamma_extend(problem, problem.nu)
        ok &= tnu.residual_cond1 <= 1e-10
        # gamma(nu) = eta * z* at the calibration space
        ok &= bool(np.allclose(tnu.values, problem.eta * problem.zstar,
                               atol=1e-9))
        mu = Lp(math.inf, n) if rng.random() < 0.5 else Lp(1, n)
        tmu = extend.gamma_extend(problem, mu)
        for k in range(1, n + 1):
            ok &= extend.check_cond2(problem, mu, tmu, k) <= 1e-4
            ok &= extend.check_cond3(problem, mu, problem.nu, tmu, tnu, k) <= 1e-4
    _report(8, "extension recursion on 20 random instances (cond1/2/3)", ok,
            time.time() - t0, 120.0)


def _random_polytope(rng, n=2):
    gens = rng.standard_normal((n + 2, n))
    return PolytopeByGenerators(tuple(map(tuple, gens)), n)


def test_criterion_09_pushout():
    t0 = time.time()
    rng = np.random.default_rng(9)
    ok = True
    for _ in range(10):
        G, Y = _random_polytope(rng), _random_polytope(rng)
        xg = rng.standard_normal(2)
        xy = rng.standard_normal(2)
        xg = xg / eval_norm(G, xg)   # both copies of X normed to 1
        xy = xy / eval_norm(Y, xy)
        po = amalgamated_sum(G, Y, [xg], [xy])
        rep = verify_pushout(po, rng.standard_normal((5, 2)), seed=0, n_probes=10)
        ok &= rep["embedding_G_error"] <= 1e-8
        ok &= rep["embedding_Y_error"] <= 1e-8
        ok &= rep["distance_identity_error"] <= 1e-8
    _report(9, "pushout: isometric embeddings + distance identity, 10 triples", ok,
            time.time() - t0, 30.0)


def test_criterion_10_coding_layer():
    t0 = time.time()
    rng = np.random.default_rng(10)
    ok = True
    for _ in range(50):
        dim, total = 3, 6
        selection = sorted(rng.choice(range(total), size=dim, replace=False))
        images, chosen = [], []
        for i in range(total):
            if i in selection:
                v = rng.standard_normal(dim)
                while chosen and np.linalg.matrix_rank(
                        np.array(chosen + [v]), tol=1e-6) != len(chosen) + 1:
                    v = rng.standard_normal(dim)
                chosen.append(v)
                images.append(v)
            else:
                images.append(np.array(chosen).T @ rng.standard_normal(len(chosen))
                              if chosen else np.zeros(dim))
        code = coding.PseudonormCode(Lp(1, dim), tuple(map(tuple, images)))
        ok &= coding.reduce_to_B(code)["selection"] == [i + 1 for i in selection]
    for _ in range(5):
        code = coding.PseudonormCode(
            Lp(1, 2), tuple(map(tuple, rng.standard_normal((2, 2)))))
        if not code.is_independent():
            continue
        probes = np.vstack([np.eye(2), rng.standard_normal((2, 2))])
        res = coding.rationalize_norm(code, probes, 0.1)
        ok &= all(isinstance(q, Fraction) for q in res["values"])
        ok &= res["max_probe_error"] <= 1e-9
        mu = lambda v: coding.pseudonorm_eval(res["code"], v)
        for _ in range(10):
            x, y = rng.standard_normal(2), rng.standard_normal(2)
            ok &= mu(x + y) <= mu(x) + mu(y) + 1e-8
            ok &= abs(mu(2.5 * x) - 2.5 * mu(x)) <= 1e-8 * max(1.0, mu(x))
    _report(10, "coding: 50 planted reductions recovered; rational perturbation", ok,
            time.time() - t0, 10.0)


def test_criterion_11_embedding():
    t0 = time.time()
    ok = True
    res = embed.embed_search(Lp(2, 2), Lp(math.inf, 8), 0.083, seed=0)
    ok &= res["found"] and res["certificate"].distortion <= 1.083
    res_id = embed.embed_search(Lp(1, 2), Lp(1, 2), 1e-9, seed=0)
    ok &= res_id["found"] and res_id["certificate"].distortion <= 1 + 1e-9
    res_c4 = embed.bilipschitz_embed(embed.cycle_metric(4), Lp(1, 2),
                                     1 + 1e-6, seed=0)
    ok &= res_c4["found"] and res_c4["certificate"].distortion <= 1 + 1e-6
    _report(11, "embeddings: l2^2 -> linf^8 at 1.083; identity 1; 4-cycle -> l1^2", ok,
            time.time() - t0, 60.0)


def test_criterion_12_determinism():
    t0 = time.time()
    ok = True

    def canon(obj):
        def clean(x):
            if isinstance(x, dict):
                return {k: clean(v) for k, v in x.items()}
            if isinstance(x, (list, tuple)):
                return [clean(v) for v in x]
            if isinstance(x, np.ndarray):
                return clean(x.tolist())
            if isinstance(x, (np.floating, float)):
                return repr(float(x))
            if isinstance(x, (np.integer,)):
                return int(x)
            if isinstance(x, Fraction):
                return str(x)
            return x
        return dumps_canonical(clean(obj))

    pairs = [
        lambda: maps.banach_mazur(Lp(1, 2), Lp(2, 2), seed=3, n_starts=8),
        lambda: charact.parallelogram_defect(Lp(math.inf, 2), seed=3),
        lambda: charact.lp_atom_obstruction_check(1.0, 0.1, seed=3, budget=500),
        lambda: embed.embed_search(Lp(2, 2), Lp(math.inf, 8), 0.083, seed=3),
    ]
    for fn in pairs:
        a, b = fn(), fn()
        if "certificate" in (a if isinstance(a, dict) else {}):
            a = {**a, "certificate": a["certificate"].data}
            b = {**b, "certificate": b["certificate"].data}
        ok &= canon(a) == canon(b)
    _report(12, "determinism: seeded criteria reproduce bit-identically", ok,
            time.time() - t0, 120.0)
