"""Linear maps between described spaces: operator norms, equivalence of
tuples, Banach-Mazur distance estimation, and basis constants.

Operator norms are exact (vertex maximum) when the source ball is a
polytope with enumerable vertices; otherwise a verified eps-net gives a
certified bracket [max over net, (1 + phi1(2*mesh)) * max over net].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .spaces import Lp, NormSpec, Pullback, eps_net, kernel_basis


def phi1(eps: float) -> float:
    """Net-to-sphere inflation factor, valid for 0 <= eps < 1/3."""
    if not (0 <= eps < 1 / 3):
        raise ValueError("phi1 requires 0 <= eps < 1/3")
    return 3 * eps / (1 - 3 * eps)


def phi2(spec: NormSpec, basis, eps: float) -> float:
    """Perturbation-to-equivalence modulus for the given basis of spec.

    C is the smallest norm over the l1 sphere of the coefficient space;
    returns eps / (C - eps), valid for eps < C.
    """
    C = coefficient_l1_lower(spec, basis)
    if eps >= C:
        raise ValueError(f"phi2 requires eps < C = {C}")
    return eps / (C - eps)


def coefficient_l1_lower(spec: NormSpec, basis) -> float:
    """min { spec(sum a_i b_i) : sum |a_i| = 1 } for the given basis rows."""
    B = np.asarray(basis, dtype=float)
    # min over the l1 sphere = 1 / max_{mu(a) <= 1} ||a||_1, the reverse
    # operator norm of the identity on coefficients
    mu = Pullback(tuple(map(tuple, B.T)), spec)  # mu(a) = spec(sum a_i b_i)
    up, lo = op_norm(np.eye(B.shape[0]), mu, Lp(1, B.shape[0]))
    return 1.0 / up


@dataclass
class OpNormResult:
    upper: float
    lower: float
    exact: bool


def _euclidean_reduction(spec: NormSpec):
    """If spec is a euclidean pullback ||A x||_2 (injective A), return
    (R, dim) from the QR factorization so spec(x) = ||R x||_2; else None."""
    if isinstance(spec, Pullback) and isinstance(spec.host, Lp) and spec.host.p == 2:
        A = np.asarray(spec.matrix, dtype=float)
        R = np.linalg.qr(A, mode="r")
        if abs(np.linalg.det(R)) < 1e-12:
            return None
        return R, spec.dim
    return None


def op_norm(T, source: NormSpec, target: NormSpec, mesh: float = 0.01) -> tuple[float, float]:
    """Certified bracket (upper, lower) for ||T: source -> target||.

    Exact (upper == lower up to float error) when the source ball has
    enumerable vertices.  Euclidean source with sup-norm target is also
    exact (max row euclidean norm).  Otherwise net-based.
    """
    T = np.asarray(T, dtype=float)
    if T.shape[1] != source.dim or T.shape[0] != target.dim:
        raise ValueError("matrix shape does not match the spaces")

    src2 = _euclidean_reduction(source)
    if src2 is not None:
        R, k = src2
        return op_norm(T @ np.linalg.inv(R), Lp(2.0, k), target, mesh)

    verts = source.ball_vertices()
    if verts is not None:
        vals = [target.eval(T @ v) for v in verts]
        m = max(vals)
        return m, m

    if source.dim == 1:
        # the unit sphere is a pair of points regardless of the norm
        na = source.eval(np.ones(1))
        if na <= 0:
            raise ValueError("degenerate one-dimensional source")
        m = target.eval(T @ (np.ones(1) / na))
        return m, m

    if isinstance(source, Lp) and source.p == 2:
        if isinstance(target, Lp) and target.p == 2:
            m = float(np.linalg.norm(T, 2))
            return m, m
        tf = target.ball_facets()
        if tf is not None:
            # sup over the euclidean ball of max_phi phi.(Tx) = max_phi |T'phi|_2
            m = float(np.max(np.linalg.norm(tf @ T, axis=1)))
            return m, m

    net = eps_net(source, mesh)
    lower = max(target.eval(T @ p) for p in net.points)
    upper = lower * (1.0 + phi1(2.0 * net.mesh))
    return upper, lower


def min_gain(T, source: NormSpec, target: NormSpec, mesh: float = 0.01) -> tuple[float, float]:
    """Certified bracket (upper, lower) for min_{source(x)=1} target(Tx).

    Used for inverse operator norms: ||T^{-1}|| = 1 / min_gain.  Exact when
    the *target*-pullback is polytopal with enumerable vertices (then the
    minimum over the source sphere equals 1 / vertex-max of the reverse map).
    """
    T = np.asarray(T, dtype=float)
    src2 = _euclidean_reduction(source)
    if src2 is not None:
        R, k = src2
        return min_gain(T @ np.linalg.inv(R), Lp(2.0, k), target, mesh)
    pulled = Pullback(tuple(map(tuple, T)), target)
    # min over {source = 1} of pulled  =  1 / max over {pulled <= 1} of source
    rev_verts = pulled.ball_vertices()
    if rev_verts is not None:
        m = max(source.eval(v) for v in rev_verts)
        return 1.0 / m, 1.0 / m
    if source.dim == 1:
        na = source.eval(np.ones(1))
        if na <= 0:
            raise ValueError("degenerate one-dimensional source")
        m = pulled.eval(np.ones(1) / na)
        return m, m
    if isinstance(source, Lp) and source.p == 2 and isinstance(target, Lp) and target.p == 2:
        s = np.linalg.svd(T, compute_uv=False)
        m = float(s[T.shape[1] - 1]) if T.shape[1] <= T.shape[0] else 0.0
        return m, m
    src_verts = source.ball_vertices()
    if src_verts is not None and source.dim == 1:
        # the sphere is the pair of vertices
        m = min(pulled.eval(v) for v in src_verts)
        return m, m
    if src_verts is not None and source.dim == 3:
        facets = source.ball_facets()
        if facets is not None:
            best = _min_over_polytope_boundary(pulled, src_verts, facets)
            return best, best * (1.0 - 1e-9)
    if src_verts is not None and source.dim == 2:
        # sphere = union of edge segments; minimize the convex function on each
        order = np.argsort(np.arctan2(src_verts[:, 1], src_verts[:, 0]))
        ring = src_verts[order]
        pulled2 = _euclidean_reduction(pulled)
        if pulled2 is not None:
            # pulled(x) = |R x|_2: the per-edge minimum is a 1-d least squares
            R, _ = pulled2
            best = math.inf
            for a, b in zip(ring, np.roll(ring, -1, axis=0)):
                c, d = R @ a, R @ (b - a)
                dd = float(d @ d)
                t = 0.0 if dd <= 1e-300 else float(np.clip(-(c @ d) / dd, 0.0, 1.0))
                for s in (0.0, 1.0, t):
                    best = min(best, float(np.linalg.norm(c + s * d)))
            return best, best
        from scipy.optimize import minimize_scalar

        best = math.inf
        for a, b in zip(ring, np.roll(ring, -1, axis=0)):
            f = lambda t: pulled.eval((1 - t) * a + t * b)
            res = minimize_scalar(f, bounds=(0.0, 1.0), method="bounded",
                                  options={"xatol": 1e-13})
            best = min(best, f(0.0), f(1.0), float(res.fun))
        return best, best * (1.0 - 1e-9)
    net = eps_net(source, mesh)
    raw = min(pulled.eval(p) for p in net.points)  # upper: net points lie on the sphere
    up_T, _ = op_norm(T, source, target, mesh)
    lower = raw - up_T * net.mesh  # |target(Tx) - target(Tp)| <= ||T|| * source(x-p)
    return raw, max(lower, 0.0)


def _min_over_polytope_boundary(fn_spec: NormSpec, verts: np.ndarray,
                                facets: np.ndarray) -> float:
    """min of a convex norm over the boundary of a 3-d polytope: per-facet
    convex minimization over the facet polygon (barycentric weights)."""
    from scipy.optimize import minimize as _minimize

    best = math.inf
    for f in facets:
        on_facet = verts[np.abs(verts @ f - 1.0) <= 1e-9]
        if len(on_facet) == 0:
            continue
        best = min(best, min(fn_spec.eval(v) for v in on_facet))
        if len(on_facet) < 3:
            continue

        def obj(logits):
            w = np.exp(logits - np.max(logits))
            w = w / w.sum()
            return fn_spec.eval(w @ on_facet)

        res = _minimize(obj, np.zeros(len(on_facet)), method="Nelder-Mead",
                        options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 2000})
        best = min(best, float(res.fun))
    return best


def distortion(T, source: NormSpec, target: NormSpec, mesh: float = 0.01) -> tuple[float, float]:
    """Certified bracket (upper, lower) on ||T|| * ||T^{-1}|| for injective T."""
    up, lo = op_norm(T, source, target, mesh)
    g_up, g_lo = min_gain(T, source, target, mesh)
    if g_lo <= 0:
        return math.inf, lo / g_up if g_up > 0 else 1.0
    return up / g_lo, lo / g_up


def approximates(tuple_vectors, source: NormSpec, target: NormSpec, K: float,
                 mesh: float = 0.005) -> dict:
    """Is the map (x_i) -> (e_i of target) a K-equivalence?

    The tuple lives in source; target is a spec on R^len(tuple).  Verdict is
    True when max(||T||, ||T^{-1}||) < K certifiably, False when the lower
    bound already exceeds K, and None when the bracket straddles K.
    """
    X = np.asarray(tuple_vectors, dtype=float)
    n = X.shape[0]
    if target.dim != n:
        raise ValueError("target dimension must equal the tuple length")
    mu = Pullback(tuple(map(tuple, X.T)), source)  # coefficient norm of the tuple
    up_T, lo_T = op_norm(np.eye(n), mu, target, mesh)
    up_g, lo_g = min_gain(np.eye(n), mu, target, mesh)
    up_inv = 1.0 / lo_g if lo_g > 0 else math.inf
    lo_inv = 1.0 / up_g if up_g > 0 else math.inf
    upper = max(up_T, up_inv)
    lower = max(lo_T, lo_inv)
    verdict: Optional[bool]
    if upper < K:
        verdict = True
    elif lower >= K:
        verdict = False
    else:
        verdict = None
    return {"verdict": verdict, "upper": upper, "lower": lower, "K": K}


def basis_constant(spec: NormSpec, basis, mesh: float = 0.01) -> tuple[float, float]:
    """Certified bracket on the basis constant of the given ordered basis.

    The constant is the largest operator norm of a truncation projection
    P_k(sum a_i b_i) = sum_{i<=k} a_i b_i on the coefficient space.
    """
    B = np.asarray(basis, dtype=float)
    n = B.shape[0]
    mu = Pullback(tuple(map(tuple, B.T)), spec)
    upper, lower = 1.0, 1.0
    for k in range(1, n):
        P = np.zeros((n, n))
        P[:k, :k] = np.eye(k)
        up, lo = op_norm(P, mu, mu, mesh)
        upper = max(upper, up)
        lower = max(lower, lo)
    return upper, lower


# ---------------------------------------------------------------------------
# Banach-Mazur distance


def _cayley(skew_params: np.ndarray, n: int) -> np.ndarray:
    S = np.zeros((n, n))
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            S[i, j] = skew_params[k]
            S[j, i] = -skew_params[k]
            k += 1
    eye = np.eye(n)
    return np.linalg.solve(eye + S, eye - S)


def _params_to_matrix(params: np.ndarray, n: int) -> np.ndarray:
    """SVD-style parametrization of invertible matrices: U diag(e^d) V."""
    nskew = n * (n - 1) // 2
    u = _cayley(params[:nskew], n)
    v = _cayley(params[nskew : 2 * nskew], n)
    d = np.exp(np.clip(params[2 * nskew :], -6, 6))
    return u @ np.diag(d) @ v


def banach_mazur(E: NormSpec, F: NormSpec, seed: int, n_starts: int = 64,
                 mesh: float = 0.02) -> dict:
    """Upper and lower estimates for the Banach-Mazur distance d(E, F).

    Upper: multistart minimization of a certified distortion over invertible
    matrices (Cayley/SVD parametrization, Nelder-Mead polish); deterministic
    for a fixed seed.  Lower: ratio of Euclidean distances d(., l2) computed
    by a convex program when the balls are polytopal, else 1.
    """
    n = E.dim
    if F.dim != n:
        raise ValueError("spaces must have equal dimension")
    if n > 4:
        raise ValueError("Banach-Mazur search is capped at dimension 4")
    nskew = n * (n - 1) // 2
    nparams = 2 * nskew + n
    rng = np.random.default_rng(seed)

    def objective(params):
        T = _params_to_matrix(params, n)
        up, _ = distortion(T, E, F, mesh)
        return up

    starts = [np.zeros(nparams)]
    if n == 2:
        for k in range(1, 8):
            p = np.zeros(nparams)
            theta = k * math.pi / 16.0
            p[0] = math.tan(theta / 2.0)  # Cayley angle parameter
            starts.append(p)
    while len(starts) < n_starts:
        starts.append(rng.normal(scale=1.0, size=nparams))

    lower = bm_lower_bound(E, F)
    best_val, best_T = math.inf, np.eye(n)
    start_values = []
    for s in starts[:n_starts]:
        res = minimize(objective, s, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
        start_values.append(float(res.fun))
        if res.fun < best_val:
            best_val, best_T = res.fun, _params_to_matrix(res.x, n)
        if best_val <= lower + 1e-8:  # bracket already closed
            break
    return {
        "upper": float(best_val),
        "lower": float(lower),
        "witness": best_T.tolist(),
        "seed": seed,
        "starts": n_starts,
        "start_values": start_values,
    }


def euclidean_distance(E: NormSpec) -> Optional[tuple[float, float]]:
    """Bracket (upper, lower) on d(E, l2^n) for polytopal E.

    Minimizes max_v v'Qv over ellipsoids {x : x'Q^{-1}x <= 1} inscribed in
    the ball (f'Q f <= 1 for facets f).  The upper bound re-evaluates both
    distortion factors at the solved ellipsoid; the lower bound is the
    solver optimum less a solver-tolerance margin.  None when the ball is
    not polytopal.
    """
    verts = E.ball_vertices()
    facets = E.ball_facets()
    if verts is None or facets is None:
        if isinstance(E, Lp) and E.p == 2:
            return 1.0, 1.0
        return None
    try:
        import cvxpy as cp
    except ImportError:  # pragma: no cover
        return None
    n = E.dim
    Q = cp.Variable((n, n), symmetric=True)
    t = cp.Variable()
    cons = [Q >> 1e-9 * np.eye(n)]
    for f in facets:
        cons.append(cp.bmat([[Q, f.reshape(-1, 1)], [f.reshape(1, -1), np.ones((1, 1))]]) >> 0)
    for v in verts:
        cons.append(cp.quad_form(v, Q) <= t)
    prob = cp.Problem(cp.Minimize(t), cons)
    prob.solve(solver=cp.SCS, eps=1e-9, max_iters=200000, verbose=False)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        return None
    # certify the upper value by evaluating the two factors at the ellipsoid
    Qv = np.asarray(Q.value)
    Qv = (Qv + Qv.T) / 2.0
    inner = max(float(f @ np.linalg.solve(Qv, f)) for f in facets)
    outer = max(float(v @ Qv @ v) for v in verts)
    upper = math.sqrt(outer * max(inner, 1.0))
    lower = max(1.0, math.sqrt(max(prob.value, 0.0)) - 1e-6)
    return upper, min(lower, upper)


def bm_lower_bound(E: NormSpec, F: NormSpec) -> float:
    """Lower bound for d(E, F) from Euclidean-distance ratios.

    Pairs a lower estimate of one distance with an upper estimate of the
    other so the quotient cannot exceed the true value.
    """
    dE = euclidean_distance(E)
    dF = euclidean_distance(F)
    if dE is None or dF is None:
        return 1.0
    (eu, el), (fu, fl) = dE, dF
    return max(1.0, el / fu, fl / eu)
