"""Recursive norm-compatible extension of a dominated functional.

Given a norm nu on R^n with nu(e_k) = 1, a functional z* dominated by nu,
a level eta in [0, 1), and an increasing damping sequence kappa_k < 1,
the recursion below produces, for every comparable norm mu, a table of
values gamma_k(mu) such that

  (cond1)  gamma_k(nu) = eta * z*(e_k) after the p/q calibration,
  (cond2)  sum a_i gamma_i(mu) <= kappa_k * mu(sum a_i e_i),
  (cond3)  |gamma_k(mu) - gamma_k(lambda)| <= beta_k(mu, lambda),

where beta_k is a recursively defined modulus of disagreement between two
norms.  Each level solves one concave and one convex piecewise-smooth
program (u and v below); gamma interpolates between their values with
weights fixed once and for all by calibration at nu.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .maps import coefficient_l1_lower, op_norm
from .spaces import Lp, NormSpec


def kappa_sequence(eta: float, n: int) -> list[float]:
    """kappa_k = 1 - (1 - eta) * 2^-k: strictly increasing from (1+eta)/2 to 1."""
    if not (0 <= eta < 1):
        raise ValueError("eta must lie in [0, 1)")
    if n < 1:
        raise ValueError("n must be >= 1")
    return [1.0 - (1.0 - eta) * 2.0 ** (-k) for k in range(1, n + 1)]


@dataclass
class ExtensionProblem:
    """Validated data for the extension recursion."""

    n: int
    nu: NormSpec
    zstar: np.ndarray
    eta: float
    kappa: list[float] = field(default_factory=list)

    def __post_init__(self):
        self.zstar = np.asarray(self.zstar, dtype=float)
        if self.nu.dim != self.n or len(self.zstar) != self.n:
            raise ValueError("dimension mismatch")
        if not (0 <= self.eta < 1):
            raise ValueError("eta must lie in [0, 1)")
        if not self.kappa:
            self.kappa = kappa_sequence(self.eta, self.n)
        ks = self.kappa
        if len(ks) != self.n or any(ks[i] >= ks[i + 1] for i in range(self.n - 1)) \
                or ks[-1] >= 1 or ks[0] < self.eta:
            raise ValueError("kappa must satisfy eta <= kappa_1 < ... < kappa_n < 1")
        _require_b1(self.nu)
        # |z*(x)| <= nu(x) is the operator norm of z* being <= 1; certified
        up, _ = op_norm(self.zstar.reshape(1, -1), self.nu, Lp(1, 1))
        if up > 1 + 1e-9:
            raise ValueError(f"functional is not dominated by the norm (bound {up})")


def _require_b1(spec: NormSpec, tol: float = 1e-9):
    for k in range(spec.dim):
        e = np.zeros(spec.dim)
        e[k] = 1.0
        if abs(spec.eval(e) - 1.0) > tol:
            raise ValueError("norm must take value 1 on every basis vector")


# ---------------------------------------------------------------------------
# piecewise-smooth optimization helper


def _optimize(f, dim: int, radius: float, maximize: bool, grid: int = 64,
              polish_from: int = 5) -> tuple[float, np.ndarray]:
    """Grid scan over [-radius, radius]^dim plus local polish.

    Intended for convex minimization / concave maximization (global up to
    polish tolerance) and as a best-effort ascent for the nonconvex beta
    objective.  Deterministic.
    """
    sign = -1.0 if maximize else 1.0

    def g(a):
        return sign * f(a)

    if dim == 0:
        return f(np.zeros(0)), np.zeros(0)
    if dim <= 2:
        axis = np.linspace(-radius, radius, grid + 1)
        pts = np.array(list(itertools.product(axis, repeat=dim)))
    else:
        rng = np.random.default_rng(0)
        pts = rng.uniform(-radius, radius, size=(4000, dim))
        pts = np.vstack([np.zeros(dim), pts])
    vals = np.array([g(p) for p in pts])
    order = np.argsort(vals)[:polish_from]
    best_val, best_x = math.inf, pts[order[0]]
    for idx in order:
        res = minimize(g, pts[idx], method="Nelder-Mead",
                       options={"xatol": 1e-11, "fatol": 1e-13, "maxiter": 2000})
        if res.fun < best_val:
            best_val, best_x = res.fun, res.x
    return sign * best_val, best_x


def _region_radius(problem: ExtensionProblem, spec: NormSpec, k: int) -> float:
    """Sup-norm radius covering {a : spec(sum a_i e_i) <= R_k} at level k."""
    R = 2.0 * problem.kappa[k] / (problem.kappa[k] - problem.kappa[k - 1])
    # spec(a) >= C * ||a||_1 on the first k coordinates, so the constraint
    # region sits inside the sup-ball of radius R / C (doubled for slack)
    sub = _restriction(spec, k)
    C = coefficient_l1_lower(sub, np.eye(k))
    return 2.0 * R / max(C, 1e-9)


def _restriction(spec: NormSpec, k: int) -> NormSpec:
    from .spaces import Pullback

    if k == spec.dim:
        return spec
    M = np.zeros((spec.dim, k))
    M[:k, :k] = np.eye(k)
    return Pullback(tuple(map(tuple, M)), spec)


def _embed(a: np.ndarray, n: int, extra_index: int | None = None,
           extra_value: float = 0.0) -> np.ndarray:
    v = np.zeros(n)
    v[: len(a)] = a
    if extra_index is not None:
        v[extra_index] = extra_value
    return v


# ---------------------------------------------------------------------------
# beta recursion


def beta(problem: ExtensionProblem, mu: NormSpec, lam: NormSpec, k: int,
         _cache: dict | None = None) -> float:
    """The level-k disagreement modulus between mu and lambda.

    beta_1 = 0; higher levels take a sup of the norm difference at
    e_{k+1} + sum a_i e_i plus beta-weighted |a|, over the region where
    either norm of the combination is below 2 kappa_{k+1}/(kappa_{k+1}-kappa_k).
    Grid + local ascent; the returned value is the best found (a lower
    estimate of the sup).
    """
    if k < 1 or k > problem.n:
        raise ValueError("level out of range")
    if _cache is None:
        _cache = {}
    if k in _cache:
        return _cache[k]
    if k == 1:
        _cache[1] = 0.0
        return 0.0
    j = k - 1  # a ranges over R^j
    betas = [beta(problem, mu, lam, i, _cache) for i in range(1, j + 1)]
    R = 2.0 * problem.kappa[j] / (problem.kappa[j] - problem.kappa[j - 1])
    radius = max(_region_radius(problem, mu, j), _region_radius(problem, lam, j))
    e_next = np.zeros(problem.n)
    e_next[j] = 1.0

    def objective(a):
        x = _embed(a, problem.n)
        if min(mu.eval(x), lam.eval(x)) >= R:
            return -math.inf
        y = e_next + x
        return abs(mu.eval(y) - lam.eval(y)) + sum(abs(ai) * bi for ai, bi in zip(a, betas))

    val, _ = _optimize(objective, j, radius, maximize=True)
    _cache[k] = max(val, 0.0)
    return _cache[k]


# ---------------------------------------------------------------------------
# gamma recursion


@dataclass
class GammaTable:
    values: list[float]
    u_values: list[float]
    v_values: list[float]
    pq: list[tuple[float, float]]
    residual_cond1: float | None  # only for the calibration space


def _uv_programs(problem: ExtensionProblem, spec: NormSpec, gammas: list[float],
                 k: int, radius_factor: float = 1.0) -> tuple[float, float]:
    """u_{k+1} (concave sup) and v_{k+1} (convex inf) given gamma_1..gamma_k."""
    kap = problem.kappa[k]  # kappa_{k+1} (0-based index k)
    e_next = np.zeros(problem.n)
    e_next[k] = 1.0
    radius = _region_radius(problem, spec, k) * radius_factor

    def u_obj(a):
        x = _embed(a, problem.n)
        return -kap * spec.eval(-e_next + x) + float(np.dot(a, gammas[:k]))

    def v_obj(a):
        x = _embed(a, problem.n)
        return kap * spec.eval(e_next + x) - float(np.dot(a, gammas[:k]))

    u_val, _ = _optimize(u_obj, k, radius, maximize=True)
    v_val, _ = _optimize(v_obj, k, radius, maximize=False)
    return u_val, v_val


def gamma_extend(problem: ExtensionProblem, mu: NormSpec,
                 calibration: GammaTable | None = None) -> GammaTable:
    """Compute the gamma table for mu (calibrating on nu when needed).

    The interpolation weights p/q are fixed by requiring exact equality
    gamma_{k+1}(nu) = eta * z*(e_{k+1}) at the calibration space; the same
    weights are then reused for every mu, which is what makes cond3
    (continuity in the norm) meaningful.
    """
    _require_b1(mu)
    if mu.dim != problem.n:
        raise ValueError("dimension mismatch")
    if calibration is None and mu is not problem.nu:
        calibration = gamma_extend(problem, problem.nu)
    n = problem.n
    is_calibration = calibration is None

    values = [problem.eta * problem.zstar[0]]
    u_values: list[float] = [math.nan]
    v_values: list[float] = [math.nan]
    pq: list[tuple[float, float]] = [(0.5, 0.5)]
    worst_cond1 = 0.0
    for k in range(1, n):
        u_val, v_val = _uv_programs(problem, mu, values, k)
        if is_calibration:
            target = problem.eta * problem.zstar[k]
            if u_val > v_val + 1e-8:
                raise RuntimeError(f"u > v at level {k + 1}: invalid problem data")
            if target < u_val - 1e-8 or target > v_val + 1e-8:
                raise RuntimeError("calibration target escapes [u, v]")
            span = v_val - u_val
            q = 0.5 if span <= 1e-15 else min(max((target - u_val) / span, 0.0), 1.0)
            p = 1.0 - q
            gamma = p * u_val + q * v_val
            worst_cond1 = max(worst_cond1, abs(gamma - target))
        else:
            p, q = calibration.pq[k]
            gamma = p * u_val + q * v_val
            gamma = min(max(gamma, u_val), v_val) if u_val <= v_val else gamma
        values.append(gamma)
        u_values.append(u_val)
        v_values.append(v_val)
        pq.append((p, q) if is_calibration else calibration.pq[k])
    return GammaTable(values, u_values, v_values, pq,
                      worst_cond1 if is_calibration else None)


def check_cond2(problem: ExtensionProblem, mu: NormSpec, table: GammaTable,
                k: int) -> float:
    """Adversarial residual max_a [sum a_i gamma_i(mu) - kappa_k mu(a)]."""
    if not 1 <= k <= problem.n:
        raise ValueError("level out of range")
    kap = problem.kappa[k - 1]
    g = np.array(table.values[:k])
    # the residual is concave and coercive; a fixed sup-ball suffices
    C = coefficient_l1_lower(_restriction(mu, k), np.eye(k))
    radius = 8.0 / max(C, 1e-9)

    def obj(a):
        x = _embed(a, problem.n)
        return float(np.dot(a, g)) - kap * mu.eval(x)

    val, _ = _optimize(obj, k, radius, maximize=True)
    return max(val, 0.0)


def check_cond3(problem: ExtensionProblem, mu: NormSpec, lam: NormSpec,
                tmu: GammaTable, tlam: GammaTable, k: int) -> float:
    """Residual |gamma_k(mu) - gamma_k(lambda)| - beta_k(mu, lambda)."""
    b = beta(problem, mu, lam, k)
    return abs(tmu.values[k - 1] - tlam.values[k - 1]) - b
