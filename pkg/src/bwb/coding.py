"""Truncated pseudonorm codes: evaluation, subbasic membership, the
reduction onto independent coordinates, sup/integral constructors over
finite data, and rational perturbation of a norm on a finite probe set.

A code is a host space plus a finite list of images: the coded pseudonorm
of a coefficient vector is the host norm of the corresponding image
combination.  The images may be dependent or zero (a genuine pseudonorm);
codes whose images are independent form the well-behaved class that the
reduction targets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .spaces import (
    DirectSum,
    DiscreteLp,
    FiniteCK,
    Lp,
    NormSpec,
    PolytopeByGenerators,
    Pullback,
)

_RANK_TOL = 1e-8


@dataclass(frozen=True)
class PseudonormCode:
    """A truncated pseudonorm: mu(sum a_i e_i) = host(sum a_i x_i)."""

    host: NormSpec
    images: tuple  # rows: x_1 ... x_N in host coordinates

    def __post_init__(self):
        imgs = tuple(tuple(x) for x in self.images)
        object.__setattr__(self, "images", imgs)
        if any(len(x) != self.host.dim for x in imgs):
            raise ValueError("image length does not match the host dimension")

    @property
    def truncation(self) -> int:
        return len(self.images)

    def image_matrix(self) -> np.ndarray:
        return np.array(self.images, dtype=float)

    def is_independent(self, tol: float = _RANK_TOL) -> bool:
        X = self.image_matrix()
        return np.linalg.matrix_rank(X, tol=tol * max(1.0, np.abs(X).max())) == len(X)


def pseudonorm_eval(code: PseudonormCode, v) -> float:
    v = np.asarray(v, dtype=float)
    if len(v) > code.truncation:
        if np.any(v[code.truncation:] != 0):
            raise ValueError("support of v exceeds the truncation")
        v = v[: code.truncation]
    if len(v) < code.truncation:
        v = np.concatenate([v, np.zeros(code.truncation - len(v))])
    return code.host.eval(v @ code.image_matrix())


@dataclass(frozen=True)
class Interval:
    """Open interval with rational (or infinite) endpoints."""

    left: float
    right: float

    def __post_init__(self):
        if not self.left < self.right:
            raise ValueError("interval must satisfy left < right")


ABSTAIN = "abstain"


def subbasic_member(code: PseudonormCode, v, interval: Interval,
                    tol: float = 1e-9):
    """Is mu(v) in the open interval?  Returns True/False or "abstain" when
    the value sits within tol of an endpoint (inexact-host safety band)."""
    val = pseudonorm_eval(code, v)
    for endpoint in (interval.left, interval.right):
        if math.isfinite(endpoint) and abs(val - endpoint) <= tol:
            return ABSTAIN
    return interval.left < val < interval.right


def reduce_to_B(code: PseudonormCode, tol: float = _RANK_TOL) -> dict:
    """Select independent coordinates by the minimal-index recursion.

    n_1 is the first index with mu(e_n) != 0; thereafter n_{k+1} is the
    first index whose image is independent of the already selected ones.
    Returns the selection (1-based), the re-indexed code, and whether the
    truncation exhausted the recursion before the span filled up
    ("truncation-incomplete" is a property of the finite window, not an
    error).
    """
    X = code.image_matrix()
    N = len(X)
    scale = max(np.abs(X).max(), 1.0)
    selected: list[int] = []
    for n in range(N):
        if not selected:
            if code.host.eval(X[n]) > tol * scale:
                selected.append(n)
            continue
        M = X[selected + [n]]
        if np.linalg.matrix_rank(M, tol=tol * scale) == len(selected) + 1:
            selected.append(n)
    if not selected:
        raise ValueError("all images are zero; nothing to select")
    reduced = PseudonormCode(code.host, tuple(code.images[i] for i in selected))
    # the untruncated recursion ranges over all indices; here it can only be
    # complete relative to the window, so flag windows whose images do not
    # yet span the host
    incomplete = len(selected) < code.host.dim
    return {
        "selection": [i + 1 for i in selected],
        "code": reduced,
        "truncation_incomplete": bool(incomplete),
    }


def rho_of_K(points: Sequence, tables) -> PseudonormCode:
    """Sup-norm constructor over a finite point set.

    tables[i][k] is the value of the i-th dictionary function at the k-th
    point; the coded norm is max_k |sum_i r_i f_i(x_k)|, the C(K)-style
    norm realized exactly on finite K.
    """
    if len(points) == 0:
        raise ValueError("point set must be nonempty")
    T = [[row[k] for row in tables] for k in range(len(points))]
    host = FiniteCK(tuple(tuple(r) for r in T))
    return PseudonormCode(host, tuple(tuple(1 if j == i else 0 for j in range(len(tables)))
                                      for i in range(len(tables))))


def sigma_of_lambda(weights, tables, p: float) -> PseudonormCode:
    """Integral-norm constructor over a discrete probability measure.

    weights are the atom masses (nonnegative, summing to one); the coded
    norm is (sum_x lambda(x) |sum_i r_i g_i(x)|^p)^(1/p).
    """
    w = [Fraction(x) if isinstance(x, (int, Fraction)) else float(x) for x in weights]
    if any((float(x) < 0) for x in w):
        raise ValueError("weights must be nonnegative")
    if abs(math.fsum(float(x) for x in w) - 1.0) > 1e-9:
        raise ValueError("weights must sum to one")
    host = DiscreteLp(p, tuple(w))
    images = tuple(tuple(row) for row in tables)  # g_i as a vector over atoms
    return PseudonormCode(host, images)


# ---------------------------------------------------------------------------
# rational perturbation


def _l1_combination_value(vectors: np.ndarray, costs: np.ndarray, v: np.ndarray) -> float:
    """min { sum |alpha_i| c_i : v = sum alpha_i vectors_i } (LP), inf if none."""
    A = vectors.T
    m = A.shape[1]
    res = linprog(np.concatenate([costs, costs]),
                  A_eq=np.hstack([A, -A]), b_eq=v,
                  bounds=[(0, None)] * (2 * m), method="highs")
    if not res.success:
        return math.inf
    return float(res.fun)


def rationalize_norm(code: PseudonormCode, probes, eps: float,
                     max_denominator: int = 10 ** 6) -> dict:
    """Perturb a coded norm to take rational values on a finite probe set.

    Follows the perturbation procedure: colinear probes are collapsed, the
    norm is stiffened by a vanishing Euclidean term (parameter m doubled)
    until each probe value is strictly below the cheapest alternative
    representation cost K_i, each value is then rounded to a rational in
    [mu(a_i), min(K_i, mu(a_i) + eps)), and the result extends to span A by
    the weighted-l1 infimum, realized as a generator-polytope host.
    Coordinates outside span A receive an independent Euclidean extension.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    A_raw = np.array([np.asarray(a, dtype=float) for a in probes])
    if A_raw.size == 0 or np.any(np.all(A_raw == 0, axis=1) if A_raw.ndim == 2 else [True]):
        raise ValueError("probe set must be finite and avoid zero")
    n = code.truncation

    def mu(v):
        return pseudonorm_eval(code, v)

    # collapse colinear pairs (keep the first representative)
    kept: list[np.ndarray] = []
    for a in A_raw:
        if any(_colinear(a, b) for b in kept):
            continue
        kept.append(a)
    A = np.array(kept)
    k = len(A)

    # start with the perturbation already below eps/2 on every probe, so the
    # rounding interval [mu_m(a_i), mu(a_i) + eps) is nonempty
    max_norm = max(np.linalg.norm(a) for a in A)
    m = 1
    while max_norm / m >= eps / 2:
        m *= 2
    while True:
        def mu_m(v, m=m):
            return mu(v) + np.linalg.norm(v) / m

        vals = np.array([mu_m(a) for a in A])
        Ks = np.array([_cheapest_alternative(A, vals, i, mu_m) for i in range(k)])
        if np.all(vals < Ks - 1e-12):
            break
        m *= 2
        if m > 2 ** 40:
            raise RuntimeError("perturbation did not separate the probe values")

    rationals = []
    for i in range(k):
        lo = vals[i]
        hi = min(Ks[i], mu(A[i]) + eps, vals[i] + eps)
        q = _rational_in(lo, hi, max_denominator)
        rationals.append(q)

    # host for the extension: gauge of conv(+- a_i / q_i) on span A, plus an
    # independent Euclidean block on a complement of span A
    gens = [tuple(Fraction(x).limit_denominator(10 ** 9) / q for x in a)
            for a, q in zip(A, rationals)]
    span_rank = np.linalg.matrix_rank(A, tol=1e-10)
    complement: list[np.ndarray] = []
    if span_rank < n:
        q_basis, _ = np.linalg.qr(A.T, mode="complete")
        for j in range(span_rank, n):
            complement.append(q_basis[:, j])
    if complement:
        host = DirectSum(1, (PolytopeByGenerators(tuple(gens), n), Lp(2, n)))
        # embed: v -> (projection onto span A part via generators, remainder)
        # realized by a pullback below
        P_span = A.T @ np.linalg.pinv(A.T)
        R = np.eye(n) - P_span
        M = np.vstack([P_span, R])
        new_host: NormSpec = Pullback(tuple(map(tuple, M)), host)
    else:
        new_host = PolytopeByGenerators(tuple(gens), n)
    out = PseudonormCode(new_host, tuple(tuple(row) for row in np.eye(n)))
    achieved = [pseudonorm_eval(out, a) for a in A]
    return {
        "code": out,
        "probes": [list(a) for a in A],
        "values": rationals,
        "max_probe_error": max(abs(v - float(q)) for v, q in zip(achieved, rationals)),
        "eps": eps,
        "m": m,
    }


def _colinear(a, b, tol=1e-10) -> bool:
    a, b = np.asarray(a, float), np.asarray(b, float)
    return np.linalg.norm(a) > 0 and np.linalg.norm(b) > 0 and \
        np.linalg.matrix_rank(np.vstack([a, b]), tol=tol) <= 1


def _cheapest_alternative(A: np.ndarray, vals: np.ndarray, i: int, norm_fn) -> float:
    """K_i: the cheapest representation cost of A[i] by the other probes."""
    k = len(A)
    others = [j for j in range(k) if j != i]
    if not others:
        return math.inf
    return _l1_combination_value(A[others], vals[others], A[i])


def _rational_in(lo: float, hi: float, max_denominator: int) -> Fraction:
    """A rational in [lo, hi) (preferring small denominators), hi > lo."""
    if not hi > lo:
        hi = lo + 1e-12
    mid = (lo + hi) / 2.0
    for den_pow in range(1, 64):
        q = Fraction(mid).limit_denominator(2 ** den_pow)
        if lo <= q < hi:
            return q
    return Fraction(mid).limit_denominator(max_denominator)
