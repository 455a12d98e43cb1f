"""Dual-ball models and the Szlenk-type derivative on a closed-form class.

The workhorse is ``TailBudgetSet``: sets {(h, t) : h in P, ||t||_1 <= b(h)}
with a polyhedral head P in R^d and a piecewise-linear concave tail budget
b (a minimum of affine pieces).  On this class the eps-derivative has a
closed form: a point survives exactly when its residual tail budget
b(h) - ||t||_1 is at least eps/2, so the derived set is again of the same
form with budget b - eps/2 and head restricted to {b >= eps/2}.  All data
is exact rational, so iteration, scaling and comparison are exact for
head dimension <= 1 (higher head dimensions fall back to float LPs).

Boundary convention: survival at exact equality (residual == eps/2) is
kept; the scalar 0 < eps < 1 identity for the c_0-type model,
s_{2 eps}(B) = (1 - eps) B, holds verbatim under this convention.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .spaces import Lp, NormSpec, _vertices_from_facets

RationalLike = Union[int, Fraction]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        num, den = (x.split("/") + ["1"])[:2]
        return Fraction(int(num), int(den))
    return Fraction(x).limit_denominator(10 ** 12)


@dataclass(frozen=True)
class Affine:
    """h -> const + coeffs . h with rational data."""

    const: Fraction
    coeffs: tuple

    def __call__(self, h: Sequence[Fraction]) -> Fraction:
        return self.const + sum(c * x for c, x in zip(self.coeffs, h))

    def shifted(self, delta: Fraction) -> "Affine":
        return Affine(self.const + delta, self.coeffs)


@dataclass(frozen=True)
class TailBudgetSet:
    """{(h, t) : h in P, ||t||_1 <= b(h)} with P = {h : a.h <= c} and
    b = min of affine pieces.  head_dim may be zero (single abstract point).
    """

    head_dim: int
    constraints: tuple  # of Affine; constraint is piece(h) >= 0, i.e. c + a.h >= 0
    budget: tuple       # of Affine; b(h) = min over pieces

    @staticmethod
    def make(head_dim: int, constraints, budget) -> "TailBudgetSet":
        def conv(items):
            out = []
            for c, coeffs in items:
                out.append(Affine(_frac(c), tuple(_frac(x) for x in coeffs)))
            return tuple(out)

        return TailBudgetSet(head_dim, conv(constraints), conv(budget))

    @staticmethod
    def unit_ball(scale: RationalLike = 1) -> "TailBudgetSet":
        """The c_0-type dual-ball model: zero-dimensional head, budget = scale."""
        return TailBudgetSet(0, (), (Affine(_frac(scale), ()),))

    # -- geometry ----------------------------------------------------------

    def head_feasible(self) -> bool:
        if self.head_dim == 0:
            return all(a.const >= 0 for a in self.constraints)
        if self.head_dim == 1:
            lo, hi = self._interval()
            return lo is not None and lo <= hi
        return self._feasible_lp()

    def _interval(self):
        """Exact feasible interval [lo, hi] for head_dim == 1 (None = empty)."""
        lo, hi = Fraction(-(10 ** 9)), Fraction(10 ** 9)
        for a in self.constraints:
            k = a.coeffs[0] if a.coeffs else Fraction(0)
            if k == 0:
                if a.const < 0:
                    return None, None
            elif k > 0:
                lo = max(lo, -a.const / k)
            else:
                hi = min(hi, -a.const / k)
        if lo > hi:
            return None, None
        return lo, hi

    def _feasible_lp(self) -> bool:
        from scipy.optimize import linprog

        A = -np.array([[float(c) for c in a.coeffs] for a in self.constraints])
        b = np.array([float(a.const) for a in self.constraints])
        res = linprog(np.zeros(self.head_dim), A_ub=A, b_ub=b,
                      bounds=[(None, None)] * self.head_dim, method="highs")
        return res.status == 0

    def max_budget(self) -> Optional[Fraction]:
        """Exact max of b over P (head_dim <= 1), float fallback above; None if P empty."""
        if not self.budget:
            return None
        if self.head_dim == 0:
            if not self.head_feasible():
                return None
            return min(a.const for a in self.budget)
        if self.head_dim == 1:
            lo, hi = self._interval()
            if lo is None:
                return None
            candidates = {lo, hi}
            for p, q in itertools.combinations(self.budget, 2):
                kp = p.coeffs[0] if p.coeffs else Fraction(0)
                kq = q.coeffs[0] if q.coeffs else Fraction(0)
                if kp != kq:
                    h = (q.const - p.const) / (kp - kq)
                    if lo <= h <= hi:
                        candidates.add(h)
            return max(min(a((h,)) for a in self.budget) for h in candidates)
        return self._max_budget_lp()

    def _max_budget_lp(self) -> Optional[Fraction]:
        from scipy.optimize import linprog

        d = self.head_dim
        # vars (h, s): maximize s subject to s <= budget pieces, head constraints
        n = d + 1
        A_rows, b_rows = [], []
        for a in self.constraints:
            A_rows.append([-float(c) for c in a.coeffs] + [0.0])
            b_rows.append(float(a.const))
        for a in self.budget:
            A_rows.append([-float(c) for c in a.coeffs] + [1.0])
            b_rows.append(float(a.const))
        c_obj = np.zeros(n)
        c_obj[-1] = -1.0
        res = linprog(c_obj, A_ub=np.array(A_rows), b_ub=np.array(b_rows),
                      bounds=[(None, None)] * n, method="highs")
        if res.status != 0:
            return None
        return _frac(float(-res.fun))

    def is_empty(self) -> bool:
        m = self.max_budget()
        return m is None or m < 0

    # -- calculus ----------------------------------------------------------

    def scaled(self, r: RationalLike) -> "TailBudgetSet":
        r = _frac(r)
        if r <= 0:
            raise ValueError("scaling factor must be positive")
        cons = tuple(Affine(a.const * r, a.coeffs) for a in self.constraints)
        bud = tuple(Affine(a.const * r, a.coeffs) for a in self.budget)
        return TailBudgetSet(self.head_dim, cons, bud)


def szlenk_derivative(K: TailBudgetSet, eps: RationalLike) -> TailBudgetSet:
    """Closed-form eps-derivative: budget drops by eps/2, head restricted to
    {b >= eps/2}.  Exact rational arithmetic."""
    eps = _frac(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    half = eps / 2
    new_cons = K.constraints + tuple(a.shifted(-half) for a in K.budget)
    new_budget = tuple(a.shifted(-half) for a in K.budget)
    return TailBudgetSet(K.head_dim, new_cons, new_budget)


def szlenk_index_at(K: TailBudgetSet, eps: RationalLike, cap: int = 10 ** 6) -> int:
    """Number of derivative applications until the set is empty."""
    count = 0
    while not K.is_empty():
        K = szlenk_derivative(K, eps)
        count += 1
        if count > cap:
            raise RuntimeError("iteration cap exceeded")
    return count


def contains(K1: TailBudgetSet, K2: TailBudgetSet, tol: float = 1e-9) -> bool:
    """Is K2 a subset of K1?  Exact for head_dim <= 1, float LP above."""
    if K2.is_empty():
        return True
    if K1.is_empty():
        return False
    if K2.head_dim != K1.head_dim:
        raise ValueError("head dimensions differ")
    # need: P2 subset of P1, and b2 <= b1 on P2, i.e. for every affine piece
    # A of K1's data:  min over P2 of (A - b2-violation) ...  reduce both to
    # max over P2 of (piece deficit) <= 0, a concave maximization (LP).
    for a in K1.constraints:
        if _max_over(K2, lambda h: -a(h)) > tol:
            return False
    for a in K1.budget:
        # need b2(h) <= a(h) on P2:  max over P2 of (b2(h) - a(h)) <= 0
        if _max_over(K2, None, minus=a) > tol:
            return False
    return True


def _max_over(K: TailBudgetSet, fn, minus: Optional[Affine] = None) -> float:
    """max over P_K of fn(h) (affine via callable) or of (b_K(h) - minus(h))."""
    if K.head_dim == 0:
        if not K.head_feasible():
            return -math.inf
        h = ()
        if minus is not None:
            b = min(a(h) for a in K.budget) if K.budget else Fraction(0)
            return float(b - minus(h))
        return float(fn(h))
    if K.head_dim == 1:
        lo, hi = K._interval()
        if lo is None:
            return -math.inf
        candidates = {lo, hi}
        pieces = list(K.budget)
        for p, q in itertools.combinations(pieces, 2):
            kp = p.coeffs[0] if p.coeffs else Fraction(0)
            kq = q.coeffs[0] if q.coeffs else Fraction(0)
            if kp != kq:
                h = (q.const - p.const) / (kp - kq)
                if lo <= h <= hi:
                    candidates.add(h)
        vals = []
        for h in candidates:
            hh = (h,)
            if minus is not None:
                b = min(a(hh) for a in K.budget) if K.budget else Fraction(0)
                vals.append(float(b - minus(hh)))
            else:
                vals.append(float(fn(hh)))
        return max(vals)
    # general head: float LP on (h, s)
    from scipy.optimize import linprog

    d = K.head_dim
    A_rows, b_rows = [], []
    for a in K.constraints:
        A_rows.append([-float(c) for c in a.coeffs] + [0.0])
        b_rows.append(float(a.const))
    if minus is not None:
        for a in K.budget:
            A_rows.append([-float(c) for c in a.coeffs] + [1.0])
            b_rows.append(float(a.const))
        obj = [-float(c) for c in minus.coeffs] + [1.0]
        # maximize (s - minus(h)) with s <= b(h)
        res = linprog(-np.array(obj), A_ub=np.array(A_rows), b_ub=np.array(b_rows),
                      bounds=[(None, None)] * (d + 1), method="highs")
        if res.status != 0:
            return -math.inf
        return float(-res.fun - float(minus.const))
    # fn must be affine: probe via its action on basis
    zero = fn(tuple(Fraction(0) for _ in range(d)))
    coeffs = []
    for i in range(d):
        e = tuple(Fraction(1 if j == i else 0) for j in range(d))
        coeffs.append(float(fn(e) - zero))
    res = linprog(-np.array(coeffs + [0.0]),
                  A_ub=np.array(A_rows), b_ub=np.array(b_rows),
                  bounds=[(None, None)] * (d + 1), method="highs")
    if res.status != 0:
        return -math.inf
    return float(-res.fun + float(zero))


def summable_check(K: TailBudgetSet, grid_pow: int = 10, max_len: int = 2 ** 12) -> dict:
    """Estimate M = sup { sum eps_i : iterated derivative stays nonempty }.

    On the closed-form class the iterated set is nonempty exactly when the
    partial sums of eps_i/2 stay within the maximal budget, so the supremum
    over dyadic sequences (grid 2^-grid_pow, length <= max_len) is the
    largest representable dyadic below twice the max budget.
    """
    m = K.max_budget()
    if m is None or m < 0:
        return {"is_summable": True, "M": Fraction(0), "capped": False}
    step = Fraction(1, 2 ** grid_pow)
    target = 2 * m
    n_steps = min(int(target / step), max_len)
    M = n_steps * step
    # verify on the rule: the sequence (step, step, ..., step) keeps K nonempty
    probe = K
    for _ in range(n_steps):
        probe = szlenk_derivative(probe, step)
    assert not probe.is_empty() or n_steps == 0
    return {"is_summable": True, "M": M, "capped": n_steps == max_len}


def c0_predicate(K: TailBudgetSet, eps: RationalLike) -> dict:
    """Does s_{2 eps}(K) equal (1 - eps) K?  Returns verdict and discrepancy."""
    eps = _frac(eps)
    if not (0 < eps < 1):
        raise ValueError("eps must lie in (0, 1)")
    derived = szlenk_derivative(K, 2 * eps)
    scaled = K.scaled(1 - eps)
    forward = contains(scaled, derived)
    backward = contains(derived, scaled)
    disc = _discrepancy(derived, scaled)
    return {"holds": bool(forward and backward), "discrepancy": disc}


def _discrepancy(K1: TailBudgetSet, K2: TailBudgetSet) -> float:
    """Numeric mismatch measure between two tail-budget sets."""
    e1, e2 = K1.is_empty(), K2.is_empty()
    if e1 and e2:
        return 0.0
    if e1 != e2:
        other = K2 if e1 else K1
        return max(float(other.max_budget() or 0), 1.0)
    vals = []
    for a in K2.budget:
        vals.append(max(0.0, _max_over(K1, None, minus=a)))
    for a in K1.budget:
        vals.append(max(0.0, _max_over(K2, None, minus=a)))
    for a in K2.constraints:
        vals.append(max(0.0, _max_over(K1, lambda h, a=a: -a(h))))
    for a in K1.constraints:
        vals.append(max(0.0, _max_over(K2, lambda h, a=a: -a(h))))
    return max(vals) if vals else 0.0


# ---------------------------------------------------------------------------
# finite brute-force control and dual-ball models


@dataclass(frozen=True)
class PolytopeCompact:
    """A finite point list standing in for a weak*-compact set."""

    points: tuple  # of tuples of floats

    def as_array(self) -> np.ndarray:
        return np.array(self.points, dtype=float)


def szlenk_bruteforce(K: PolytopeCompact, eps: float, mesh: float = 1e-6) -> dict:
    """Derivative of a finite set at cylinder-mesh resolution.

    A point survives when its mesh-neighborhood (sup metric) meets K in
    diameter >= eps.  Finite sets are norm-discrete, so with mesh below the
    minimal pairwise gap the result is empty — the expected truncation
    artifact; coarser meshes over-approximate and are flagged.
    """
    pts = K.as_array()
    if pts.size == 0:
        return {"result": PolytopeCompact(()), "mesh_limited": False}
    n = len(pts)
    gaps = [np.max(np.abs(pts[i] - pts[j])) for i in range(n) for j in range(i + 1, n)]
    min_gap = min(gaps) if gaps else math.inf
    survivors = []
    for x in pts:
        nbhd = pts[np.max(np.abs(pts - x), axis=1) <= mesh + 1e-15]
        diam = 0.0
        for i in range(len(nbhd)):
            for j in range(i + 1, len(nbhd)):
                diam = max(diam, float(np.max(np.abs(nbhd[i] - nbhd[j]))))
        if diam >= eps:
            survivors.append(tuple(x))
    return {
        "result": PolytopeCompact(tuple(survivors)),
        "mesh_limited": bool(mesh >= min_gap),
    }


def omega_model(spec: Optional[NormSpec] = None, dense_tuple=None,
                family: Optional[str] = None, disc_points: int = 64):
    """Dual-ball model of a space.

    * family="c0": the zero-head tail-budget model of the c_0-type dual
      ball (an l_1 ball of tail mass one).
    * finite-dim spec with a dense tuple: the coordinate set
      {a : |sum_{n in M} a_n| <= ||sum_{n in M} x_n|| for all finite M}
      realized exactly on the truncation (a polytope; vertices returned).
    * finite-dim spec alone: the dual unit ball (polytopal: vertices are the
      primal facet functionals; Euclidean: a disc_points approximation).
    """
    if family == "c0":
        return TailBudgetSet.unit_ball(1)
    if spec is None:
        raise ValueError("need a spec or a supported family name")
    if dense_tuple is not None:
        X = np.asarray(dense_tuple, dtype=float)
        N = X.shape[0]
        facets = []
        for mask in itertools.product([0, 1], repeat=N):
            if not any(mask):
                continue
            norm = spec.eval(np.asarray(mask, dtype=float) @ X)
            if norm <= 1e-12:
                raise ValueError("dense tuple has a null partial sum; model degenerate")
            row = np.asarray(mask, dtype=float) / norm
            facets.append(row)
            facets.append(-row)
        verts = _vertices_from_facets(np.array(facets))
        return PolytopeCompact(tuple(map(tuple, verts)))
    facets = spec.ball_facets()
    if facets is not None:
        # polar: dual-ball vertices sit at the primal facet functionals
        return PolytopeCompact(tuple(map(tuple, facets)))
    if isinstance(spec, Lp) and spec.p == 2 and spec.dim == 2:
        ang = np.linspace(0, 2 * math.pi, disc_points, endpoint=False)
        return PolytopeCompact(tuple((math.cos(a), math.sin(a)) for a in ang))
    raise ValueError("unsupported descriptor for a dual-ball model")
