"""Finite-dimensional normed spaces described by composable specs.

A ``NormSpec`` is a symbolic description of a norm (or seminorm) on R^d:
p-norms, polytopal norms given by generators or facets, pullbacks along
linear maps, direct sums, quotients, weighted discrete L_p, and sup-norms
of function tables.  Specs evaluate numerically; the polytopal fragment
(p in {1, inf}, polytopes, and anything built from them by pullback,
direct sum and quotient) additionally admits an exact linear-programming
evaluation path and vertex/facet enumeration of the unit ball.

Polytope data may be given as exact rationals (``fractions.Fraction``),
which are preserved through serialization round-trips.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import linprog, minimize
from scipy.spatial import ConvexHull

Number = Union[int, float, Fraction]

_EVAL_TOL = 1e-9
_RANK_TOL = 1e-9


def _as_float_array(data) -> np.ndarray:
    return np.asarray(data, dtype=float)


def _as_tuple_matrix(rows) -> tuple:
    """Freeze a matrix-like into nested tuples, keeping Fractions intact."""
    out = []
    for row in rows:
        out.append(tuple(x if isinstance(x, Fraction) else x for x in row))
    return tuple(out)


class NormSpec:
    """Base class: a symbolic norm on R^dim."""

    def eval(self, v) -> float:
        raise NotImplementedError

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def is_lp_representable(self) -> bool:
        """True when norm(x) <= t is encodable by linear constraints."""
        return False

    def ball_vertices(self) -> Optional[np.ndarray]:
        """Vertices of the unit ball (rows), or None when not polytopal."""
        return None

    def ball_facets(self) -> Optional[np.ndarray]:
        """Functionals f (rows) with unit ball = {x : f.x <= 1 for all f}.

        The returned list is closed under negation.  None when not polytopal.
        """
        return None

    def is_degenerate(self) -> bool:
        """True when the spec defines a seminorm with nontrivial kernel."""
        return kernel_basis(self).shape[0] > 0


# ---------------------------------------------------------------------------
# concrete specs


@dataclass(frozen=True)
class Lp(NormSpec):
    """The space l_p^n.  p = inf is the sup norm."""

    p: float
    n: int

    def __post_init__(self):
        if not (self.p >= 1):
            raise ValueError(f"p must be >= 1, got {self.p}")
        if self.n < 1:
            raise ValueError("dimension must be positive")

    @property
    def dim(self) -> int:
        return self.n

    def eval(self, v) -> float:
        v = _as_float_array(v)
        if math.isinf(self.p):
            return float(np.max(np.abs(v))) if v.size else 0.0
        if self.p == 1:
            return float(np.sum(np.abs(v)))
        if self.p == 2:
            return float(np.linalg.norm(v))
        return float(np.sum(np.abs(v) ** self.p) ** (1.0 / self.p))

    def is_lp_representable(self) -> bool:
        return self.p == 1 or math.isinf(self.p)

    def ball_vertices(self):
        if self.p == 1:
            eye = np.eye(self.n)
            return np.vstack([eye, -eye])
        if math.isinf(self.p):
            return np.array(list(itertools.product([-1.0, 1.0], repeat=self.n)))
        return None

    def ball_facets(self):
        if self.p == 1:
            return np.array(list(itertools.product([-1.0, 1.0], repeat=self.n)))
        if math.isinf(self.p):
            eye = np.eye(self.n)
            return np.vstack([eye, -eye])
        return None


@dataclass(frozen=True)
class PolytopeByGenerators(NormSpec):
    """Gauge of conv(+-g_1, ..., +-g_m).

    If the generators do not span R^d the gauge is infinite off their span;
    ``spans`` reports this and ``eval`` raises off-span.
    """

    generators: tuple
    ambient_dim: int

    def __post_init__(self):
        gens = _as_tuple_matrix(self.generators)
        object.__setattr__(self, "generators", gens)
        if any(len(g) != self.ambient_dim for g in gens):
            raise ValueError("generator length mismatch")
        if not gens:
            raise ValueError("need at least one generator")

    @property
    def dim(self) -> int:
        return self.ambient_dim

    def _gen_matrix(self) -> np.ndarray:
        return _as_float_array(self.generators)  # rows = generators

    def spans(self) -> bool:
        return np.linalg.matrix_rank(self._gen_matrix(), tol=_RANK_TOL) == self.ambient_dim

    def _cached_facets(self) -> Optional[np.ndarray]:
        cached = getattr(self, "_facets_memo", "unset")
        if cached is not None and not isinstance(cached, np.ndarray):
            memo = self.ball_facets() if self.spans() else None
            object.__setattr__(self, "_facets_memo", memo)
            cached = memo
        return cached

    def eval(self, v) -> float:
        v = _as_float_array(v)
        F = self._cached_facets()
        if F is not None:
            # gauge of a full-dimensional symmetric polytope = support max
            return float(np.max(np.abs(F @ v)))
        G = self._gen_matrix().T  # columns = generators
        m = G.shape[1]
        # min sum(c+ + c-)  s.t.  G c+ - G c- = v,  c>=0
        res = linprog(
            c=np.ones(2 * m),
            A_eq=np.hstack([G, -G]),
            b_eq=v,
            bounds=[(0, None)] * (2 * m),
            method="highs",
        )
        if not res.success:
            raise ValueError("vector outside the span of the generators")
        return float(res.fun)

    def is_lp_representable(self) -> bool:
        return True

    def ball_vertices(self):
        G = self._gen_matrix()
        pts = np.vstack([G, -G])
        return _extreme_points(pts)

    def ball_facets(self):
        return _facets_from_vertices(self.ball_vertices())


@dataclass(frozen=True)
class PolytopeByFacets(NormSpec):
    """Norm x -> max_i |f_i . x| for the given facet functionals."""

    facets: tuple
    ambient_dim: int

    def __post_init__(self):
        fac = _as_tuple_matrix(self.facets)
        object.__setattr__(self, "facets", fac)
        if any(len(f) != self.ambient_dim for f in fac):
            raise ValueError("facet length mismatch")
        if not fac:
            raise ValueError("need at least one facet")

    @property
    def dim(self) -> int:
        return self.ambient_dim

    def _fac_matrix(self) -> np.ndarray:
        return _as_float_array(self.facets)

    def eval(self, v) -> float:
        v = _as_float_array(v)
        return float(np.max(np.abs(self._fac_matrix() @ v)))

    def is_lp_representable(self) -> bool:
        return True

    def ball_facets(self):
        F = self._fac_matrix()
        return np.vstack([F, -F])

    def ball_vertices(self):
        return _vertices_from_facets(self.ball_facets())


@dataclass(frozen=True)
class Pullback(NormSpec):
    """x -> host(A x) for an injective matrix A (host_dim x dim)."""

    matrix: tuple
    host: NormSpec

    def __post_init__(self):
        object.__setattr__(self, "matrix", _as_tuple_matrix(self.matrix))

    @property
    def dim(self) -> int:
        return len(self.matrix[0])

    def _A(self) -> np.ndarray:
        return _as_float_array(self.matrix)

    def eval(self, v) -> float:
        return self.host.eval(self._A() @ _as_float_array(v))

    def is_lp_representable(self) -> bool:
        return self.host.is_lp_representable()

    def ball_vertices(self):
        A = self._A()
        if A.shape[0] == A.shape[1]:
            host_v = self.host.ball_vertices()
            if host_v is not None and abs(np.linalg.det(A)) > _RANK_TOL:
                return host_v @ np.linalg.inv(A).T
        facets = self.ball_facets()
        if facets is not None:
            return _vertices_from_facets(facets)
        return None

    def ball_facets(self):
        host_f = self.host.ball_facets()
        if host_f is None:
            return None
        A = self._A()
        F = host_f @ A
        # bounded (hence a valid H-rep of the ball) iff A is injective
        if np.linalg.matrix_rank(F, tol=_RANK_TOL) < A.shape[1]:
            return None
        return F


@dataclass(frozen=True)
class DirectSum(NormSpec):
    """p-sum of component spaces; p = 0 is treated as the sup (c_0-style) sum."""

    p: float
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if self.p != 0 and not self.p >= 1:
            raise ValueError("p must be 0 (sup) or >= 1")

    @property
    def dim(self) -> int:
        return sum(part.dim for part in self.parts)

    def _split(self, v):
        v = _as_float_array(v)
        out, k = [], 0
        for part in self.parts:
            out.append(v[k : k + part.dim])
            k += part.dim
        return out

    def eval(self, v) -> float:
        vals = np.array([part.eval(piece) for part, piece in zip(self.parts, self._split(v))])
        if self.p == 0 or math.isinf(self.p):
            return float(np.max(vals))
        if self.p == 1:
            return float(np.sum(vals))
        return float(np.sum(vals ** self.p) ** (1.0 / self.p))

    def is_lp_representable(self) -> bool:
        sup = self.p == 0 or math.isinf(self.p)
        return (self.p == 1 or sup) and all(part.is_lp_representable() for part in self.parts)

    def ball_vertices(self):
        sup = self.p == 0 or math.isinf(self.p)
        if not (self.p == 1 or sup):
            return None
        pieces = [part.ball_vertices() for part in self.parts]
        if any(piece is None for piece in pieces):
            return None
        dims = [part.dim for part in self.parts]
        offsets = np.cumsum([0] + dims)
        d = offsets[-1]
        if self.p == 1:
            rows = []
            for i, piece in enumerate(pieces):
                block = np.zeros((piece.shape[0], d))
                block[:, offsets[i] : offsets[i + 1]] = piece
                rows.append(block)
            return _extreme_points(np.vstack(rows))
        # sup-sum: cartesian product of component vertices
        rows = []
        for combo in itertools.product(*[range(p.shape[0]) for p in pieces]):
            x = np.zeros(d)
            for i, j in enumerate(combo):
                x[offsets[i] : offsets[i + 1]] = pieces[i][j]
            rows.append(x)
        return np.array(rows)

    def ball_facets(self):
        verts = self.ball_vertices()
        if verts is None:
            return None
        return _facets_from_vertices(verts)


@dataclass(frozen=True)
class Quotient(NormSpec):
    """Quotient of host by the span of the given basis vectors.

    Lives on the same coordinates as host: eval(v) = dist_host(v, span Z).
    """

    host: NormSpec
    subspace_basis: tuple

    def __post_init__(self):
        object.__setattr__(self, "subspace_basis", _as_tuple_matrix(self.subspace_basis))

    @property
    def dim(self) -> int:
        return self.host.dim

    def _Z(self) -> np.ndarray:
        return _as_float_array(self.subspace_basis).T  # columns span the subspace

    def eval(self, v) -> float:
        return quotient_norm(self.host, self.subspace_basis, v)[0]

    def is_lp_representable(self) -> bool:
        return self.host.is_lp_representable()

    def ball_vertices(self):
        # The quotient ball is full-dimensional only modulo the subspace;
        # vertex enumeration is not meaningful on the ambient coordinates.
        return None

    def is_degenerate(self) -> bool:
        return True


@dataclass(frozen=True)
class DiscreteLp(NormSpec):
    """Weighted L_p over finitely many atoms: (sum_i w_i |x_i|^p)^(1/p)."""

    p: float
    weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(self.weights))
        if any((w if isinstance(w, Fraction) else float(w)) < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if not (self.p >= 1):
            raise ValueError("p must be >= 1")

    @property
    def dim(self) -> int:
        return len(self.weights)

    def _w(self) -> np.ndarray:
        return _as_float_array(self.weights)

    def eval(self, v) -> float:
        v = _as_float_array(v)
        w = self._w()
        if math.isinf(self.p):
            live = w > 0
            return float(np.max(np.abs(v[live]))) if live.any() else 0.0
        return float(np.sum(w * np.abs(v) ** self.p) ** (1.0 / self.p))

    def is_lp_representable(self) -> bool:
        return self.p == 1 or math.isinf(self.p)

    def ball_vertices(self):
        w = self._w()
        if np.any(w <= 0):
            return None
        if self.p == 1:
            eye = np.diag(1.0 / w)
            return np.vstack([eye, -eye])
        if math.isinf(self.p):
            return np.array(list(itertools.product([-1.0, 1.0], repeat=self.dim)))
        return None

    def ball_facets(self):
        w = self._w()
        if np.any(w <= 0):
            return None
        if self.p == 1:
            return np.array(list(itertools.product([-1.0, 1.0], repeat=self.dim))) * w
        if math.isinf(self.p):
            eye = np.eye(self.dim)
            return np.vstack([eye, -eye])
        return None

    def is_degenerate(self) -> bool:
        return bool(np.any(self._w() == 0))


@dataclass(frozen=True)
class FiniteCK(NormSpec):
    """Sup norm of a function table: v -> max_k |(E v)_k|.

    Row k of E lists the values of the coordinate functionals at the k-th
    point of a finite compact set.
    """

    table: tuple

    def __post_init__(self):
        object.__setattr__(self, "table", _as_tuple_matrix(self.table))

    @property
    def dim(self) -> int:
        return len(self.table[0])

    def _E(self) -> np.ndarray:
        return _as_float_array(self.table)

    def eval(self, v) -> float:
        return float(np.max(np.abs(self._E() @ _as_float_array(v))))

    def is_lp_representable(self) -> bool:
        return True

    def ball_facets(self):
        E = self._E()
        return np.vstack([E, -E])

    def ball_vertices(self):
        if np.linalg.matrix_rank(self._E(), tol=_RANK_TOL) < self.dim:
            return None
        return _vertices_from_facets(self.ball_facets())

    def is_degenerate(self) -> bool:
        return np.linalg.matrix_rank(self._E(), tol=_RANK_TOL) < self.dim


# ---------------------------------------------------------------------------
# polytope utilities


def _extreme_points(points: np.ndarray) -> np.ndarray:
    """Extreme points of conv(points).  Handles the degenerate 1-d case."""
    points = np.asarray(points, dtype=float)
    d = points.shape[1]
    if d == 1:
        m = np.max(np.abs(points))
        return np.array([[m], [-m]])
    if np.linalg.matrix_rank(points, tol=_RANK_TOL) < d:
        raise ValueError("point set is not full-dimensional")
    hull = ConvexHull(points, qhull_options="QJ" if d > 3 else None)
    verts = points[hull.vertices]
    return _dedupe_rows(verts)


def _facets_from_vertices(vertices: np.ndarray) -> np.ndarray:
    """H-representation {f.x <= 1} of a symmetric polytope given vertices."""
    vertices = np.asarray(vertices, dtype=float)
    d = vertices.shape[1]
    if d == 1:
        m = np.max(np.abs(vertices))
        return np.array([[1.0 / m], [-1.0 / m]])
    hull = ConvexHull(vertices)
    # hull equations: a.x + b <= 0, origin interior so b < 0
    A, b = hull.equations[:, :-1], hull.equations[:, -1]
    return _dedupe_rows(A / (-b[:, None]))


def _vertices_from_facets(facets: np.ndarray) -> np.ndarray:
    """Vertices of {x : f.x <= 1 for all f} via polarity (0 interior)."""
    facets = np.asarray(facets, dtype=float)
    d = facets.shape[1]
    if np.linalg.matrix_rank(facets, tol=_RANK_TOL) < d:
        raise ValueError("facet set does not bound the polytope")
    if d == 1:
        m = np.max(np.abs(facets))
        return np.array([[1.0 / m], [-1.0 / m]])
    # polar of the facet polytope: its facets are our vertices
    return _facets_from_vertices(facets)


def _dedupe_rows(rows: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    out = []
    for r in rows:
        if not any(np.max(np.abs(r - s)) <= tol for s in out):
            out.append(r)
    return np.array(out)


def _null_space_rows(M: np.ndarray, tol: float = 1e-9) -> list:
    if M.size == 0:
        return []
    u_svd, s, vt = np.linalg.svd(M)
    rank = int(np.sum(s > tol * max(1.0, s[0] if len(s) else 1.0)))
    return list(vt[rank:])


def kernel_basis(spec: NormSpec, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis (rows) of the kernel {v : spec(v) = 0}.

    Probes the unit euclidean sphere coordinate-wise; exact for the spec
    algebra here since all kernels are linear subspaces.
    """
    d = spec.dim
    vals = []
    eye = np.eye(d)
    # collect directions annihilated by the seminorm
    gram_rows = []
    for i in range(d):
        gram_rows.append(eye[i])
    # random probes catch kernels not aligned with the axes
    rng = np.random.default_rng(0)
    for _ in range(4 * d):
        u = rng.standard_normal(d)
        gram_rows.append(u / np.linalg.norm(u))
    kernel_vecs = []
    for u in gram_rows:
        if spec.eval(u) <= tol:
            kernel_vecs.append(u)
    if isinstance(spec, Quotient):
        kernel_vecs.extend(np.asarray(spec.subspace_basis, dtype=float))
    if isinstance(spec, DiscreteLp):
        w = np.asarray(spec.weights, dtype=float)
        for i in np.where(w == 0)[0]:
            kernel_vecs.append(eye[i])
    if isinstance(spec, FiniteCK):
        # seminorm vanishes exactly on the null space of the functional table
        table = np.asarray(spec.table, dtype=float).reshape(-1, d)
        kernel_vecs.extend(_null_space_rows(table, tol))
    if isinstance(spec, PolytopeByFacets):
        facets = np.asarray(spec.facets, dtype=float)
        kernel_vecs.extend(_null_space_rows(facets, tol))
    if isinstance(spec, Pullback):
        A = np.asarray(spec.matrix, dtype=float)
        kernel_vecs.extend(_null_space_rows(A, tol))
        host_ker = kernel_basis(spec.host, tol)
        if len(host_ker):
            # v is annihilated iff A v lands inside the host kernel
            proj = np.eye(A.shape[0]) - host_ker.T @ host_ker
            kernel_vecs.extend(_null_space_rows(proj @ A, tol))
    if not kernel_vecs:
        return np.zeros((0, d))
    M = np.array(kernel_vecs, dtype=float)
    u_svd, s, vt = np.linalg.svd(M, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0] if len(s) else 1.0)))
    return vt[:rank]


# ---------------------------------------------------------------------------
# LP epigraph machinery (exact evaluation of the polytopal fragment)


class _LpBuilder:
    """Accumulates linear constraints over a growing variable vector."""

    def __init__(self, nvars: int):
        self.nvars = nvars
        self.A_ub, self.b_ub = [], []
        self.A_eq, self.b_eq = [], []

    def new_vars(self, k: int) -> range:
        r = range(self.nvars, self.nvars + k)
        self.nvars += k
        return r

    def add_ub(self, coeffs: dict, rhs: float):
        self.A_ub.append(dict(coeffs))
        self.b_ub.append(rhs)

    def add_eq(self, coeffs: dict, rhs: float):
        self.A_eq.append(dict(coeffs))
        self.b_eq.append(rhs)

    def solve(self, objective: dict, sense: str = "min"):
        c = np.zeros(self.nvars)
        for j, cj in objective.items():
            c[j] = cj
        if sense == "max":
            c = -c

        def densify(rows):
            M = np.zeros((len(rows), self.nvars))
            for i, row in enumerate(rows):
                for j, a in row.items():
                    M[i, j] = a
            return M

        res = linprog(
            c,
            A_ub=densify(self.A_ub) if self.A_ub else None,
            b_ub=np.array(self.b_ub) if self.b_ub else None,
            A_eq=densify(self.A_eq) if self.A_eq else None,
            b_eq=np.array(self.b_eq) if self.b_eq else None,
            bounds=[(None, None)] * self.nvars,
            method="highs",
        )
        return res


class _Affine:
    """Affine vector expression  value_i = sum_j C[i,j] var_j + d_i."""

    def __init__(self, C: np.ndarray, d: np.ndarray):
        self.C = np.asarray(C, dtype=float)
        self.d = np.asarray(d, dtype=float)

    @classmethod
    def const(cls, v: np.ndarray, nvars: int):
        v = np.asarray(v, dtype=float)
        return cls(np.zeros((len(v), nvars)), v)

    def apply(self, M: np.ndarray) -> "_Affine":
        return _Affine(M @ self.C, M @ self.d)

    def slice(self, a: int, b: int) -> "_Affine":
        return _Affine(self.C[a:b], self.d[a:b])

    def row(self, i: int):
        return self.C[i], self.d[i]

    def pad(self, nvars: int) -> "_Affine":
        if self.C.shape[1] == nvars:
            return self
        C = np.zeros((self.C.shape[0], nvars))
        C[:, : self.C.shape[1]] = self.C
        return _Affine(C, self.d)


def _add_norm_le(builder: _LpBuilder, spec: NormSpec, expr: _Affine, t_var: int, t_coef: float = 1.0):
    """Append constraints encoding spec(expr) <= t_coef * var[t_var]."""
    expr = expr.pad(builder.nvars)

    def row_dict(coefs, extra=None):
        d = {j: c for j, c in enumerate(coefs) if c != 0.0}
        if extra:
            for j, c in extra.items():
                d[j] = d.get(j, 0.0) + c
        return d

    def add_abs_le_t(functional_expr, rhs_var, rhs_coef):
        C_row, d_row = functional_expr
        builder.add_ub(row_dict(C_row, {rhs_var: -rhs_coef}), -d_row)
        builder.add_ub(row_dict(-C_row, {rhs_var: -rhs_coef}), d_row)

    if isinstance(spec, Lp) and spec.p == 1:
        s_vars = builder.new_vars(spec.n)
        for i, s in enumerate(s_vars):
            add_abs_le_t(expr.row(i), s, 1.0)
        builder.add_ub({**{s: 1.0 for s in s_vars}, t_var: -t_coef}, 0.0)
    elif isinstance(spec, Lp) and math.isinf(spec.p):
        for i in range(spec.n):
            add_abs_le_t(expr.row(i), t_var, t_coef)
    elif isinstance(spec, DiscreteLp) and spec.p == 1:
        w = spec._w()
        s_vars = builder.new_vars(spec.dim)
        for i, s in enumerate(s_vars):
            add_abs_le_t(expr.row(i), s, 1.0)
        builder.add_ub({**{s: w[i] for i, s in enumerate(s_vars)}, t_var: -t_coef}, 0.0)
    elif isinstance(spec, DiscreteLp) and math.isinf(spec.p):
        for i in range(spec.dim):
            if spec._w()[i] > 0:
                add_abs_le_t(expr.row(i), t_var, t_coef)
    elif isinstance(spec, (PolytopeByFacets, FiniteCK)):
        F = spec._fac_matrix() if isinstance(spec, PolytopeByFacets) else spec._E()
        fx = expr.apply(F)
        for i in range(F.shape[0]):
            add_abs_le_t(fx.row(i), t_var, t_coef)
    elif isinstance(spec, PolytopeByGenerators):
        G = spec._gen_matrix().T
        m = G.shape[1]
        c_vars = builder.new_vars(2 * m)
        # expr = G c+ - G c-,  c >= 0,  sum c <= t
        GG = np.hstack([G, -G])
        for i in range(spec.dim):
            C_row, d_row = expr.row(i)
            coefs = {j: c for j, c in enumerate(C_row) if c != 0.0}
            for k, cv in enumerate(c_vars):
                if GG[i, k] != 0.0:
                    coefs[cv] = coefs.get(cv, 0.0) - GG[i, k]
            builder.add_eq(coefs, -d_row)
        for cv in c_vars:
            builder.add_ub({cv: -1.0}, 0.0)
        builder.add_ub({**{cv: 1.0 for cv in c_vars}, t_var: -t_coef}, 0.0)
    elif isinstance(spec, Pullback):
        _add_norm_le(builder, spec.host, expr.apply(spec._A()), t_var, t_coef)
    elif isinstance(spec, DirectSum):
        offsets = np.cumsum([0] + [part.dim for part in spec.parts])
        if spec.p == 1:
            t_vars = builder.new_vars(len(spec.parts))
            for part, a, b, tv in zip(spec.parts, offsets, offsets[1:], t_vars):
                _add_norm_le(builder, part, expr.slice(a, b), tv, 1.0)
            builder.add_ub({**{tv: 1.0 for tv in t_vars}, t_var: -t_coef}, 0.0)
        else:  # sup-type sum
            for part, a, b in zip(spec.parts, offsets, offsets[1:]):
                _add_norm_le(builder, part, expr.slice(a, b), t_var, t_coef)
    elif isinstance(spec, Quotient):
        Z = spec._Z()
        z_vars = builder.new_vars(Z.shape[1])
        shifted_C = expr.pad(builder.nvars).C.copy()
        for k, zv in enumerate(z_vars):
            shifted_C[:, zv] -= Z[:, k]
        _add_norm_le(builder, spec.host, _Affine(shifted_C, expr.d), t_var, t_coef)
    else:
        raise ValueError(f"spec is not LP-representable: {type(spec).__name__}")


def eval_norm(spec: NormSpec, v) -> float:
    """Evaluate spec at v, preferring the exact LP path when available."""
    v = _as_float_array(v)
    if v.shape != (spec.dim,):
        raise ValueError(f"expected vector of length {spec.dim}, got shape {v.shape}")
    return spec.eval(v)


def batch_eval(spec: NormSpec, points: np.ndarray) -> np.ndarray:
    """Evaluate spec at each row of points, vectorized where possible."""
    points = np.asarray(points, dtype=float)
    if isinstance(spec, Lp):
        if math.isinf(spec.p):
            return np.abs(points).max(axis=1)
        return np.linalg.norm(points, ord=spec.p, axis=1)
    if isinstance(spec, PolytopeByFacets):
        return np.abs(points @ np.asarray(spec.facets, dtype=float).T).max(axis=1)
    if isinstance(spec, PolytopeByGenerators):
        F = spec._cached_facets()
        if F is not None:
            return np.abs(points @ F.T).max(axis=1)
    if isinstance(spec, Pullback):
        return batch_eval(spec.host, points @ np.asarray(spec.matrix, dtype=float).T)
    return np.array([spec.eval(p) for p in points])


def quotient_norm(host: NormSpec, subspace_basis, w) -> tuple[float, np.ndarray]:
    """dist_host(w, span Z): value and a minimizing subspace coefficient z."""
    w = _as_float_array(w)
    Z = _as_float_array(subspace_basis).T
    if Z.size == 0:
        return host.eval(w), np.zeros(0)
    k = Z.shape[1]
    if host.is_lp_representable():
        builder = _LpBuilder(k + 1)
        z_idx, t_idx = list(range(k)), k
        C = np.zeros((host.dim, k + 1))
        C[:, :k] = -Z
        _add_norm_le(builder, host, _Affine(C, w), t_idx)
        res = builder.solve({t_idx: 1.0}, "min")
        if not res.success:
            raise RuntimeError(f"quotient LP failed: {res.message}")
        return float(res.fun), res.x[:k]

    def objective(z):
        return host.eval(w - Z @ z)

    z0, *_ = np.linalg.lstsq(Z, w, rcond=None)
    best = None
    for start in (z0, np.zeros(k)):
        res = minimize(objective, start, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-12, "maxiter": 20000})
        if best is None or res.fun < best.fun:
            best = res
    return float(best.fun), best.x


# ---------------------------------------------------------------------------
# epsilon-nets


@dataclass
class EpsNet:
    """A verified eps-net of the unit sphere of a subspace.

    points: rows, in ambient coordinates, each of norm 1 (up to float error).
    mesh: the guaranteed covering radius (every sphere point is within mesh).
    """

    points: np.ndarray
    mesh: float
    basis: np.ndarray
    verified: bool


def _cube_surface_grid(k: int, m: int) -> np.ndarray:
    """Points on the boundary of [-1,1]^k with ~m subdivisions per edge."""
    if k == 1:
        return np.array([[1.0], [-1.0]])
    ticks = np.linspace(-1.0, 1.0, m + 1)
    grids = np.meshgrid(*([ticks] * (k - 1)), indexing="ij")
    face = np.stack([g.ravel() for g in grids], axis=1)
    pts = []
    for face_axis in range(k):
        rest = [i for i in range(k) if i != face_axis]
        for sign in (-1.0, 1.0):
            block = np.empty((len(face), k))
            block[:, face_axis] = sign
            block[:, rest] = face
            pts.append(block)
    allpts = np.vstack(pts)
    # drop duplicate edge/corner points shared between faces
    return np.unique(np.round(allpts, 12), axis=0)


def eps_net(spec: NormSpec, eps: float, subspace_basis=None, max_m: int = 4096) -> EpsNet:
    """Build an eps-net of the unit sphere of spec (restricted to a subspace).

    The net is verified against a reference grid four times finer: every
    reference sphere point must lie within eps of the net in the spec norm.
    Dimension of the subspace is capped at 6.
    """
    if subspace_basis is None:
        B = np.eye(spec.dim)
    else:
        B = _as_float_array(subspace_basis).T  # columns = basis
    k = B.shape[1]
    if k > 6:
        raise ValueError("eps-net restricted to subspaces of dimension <= 6")
    if k == 0:
        raise ValueError("subspace must be nontrivial")

    def normalize(dirs):
        pts = []
        for u in dirs:
            x = B @ u
            nx = spec.eval(x)
            if nx <= _EVAL_TOL:
                raise ValueError("spec is degenerate on the subspace; no sphere net")
            pts.append(x / nx)
        return np.array(pts)

    m = max(2, int(math.ceil(2.0 / eps)))
    while m <= max_m:
        net = normalize(_cube_surface_grid(k, m))
        ref = normalize(_cube_surface_grid(k, 4 * m))
        covered, worst = _covering_radius(spec, net, ref)
        if covered and worst <= eps:
            return EpsNet(points=net, mesh=eps, basis=B.T, verified=True)
        m *= 2
    raise RuntimeError("eps-net construction did not verify within the size cap")


def _covering_radius(spec, net, ref, batch=128):
    worst = 0.0
    n, d = net.shape
    for start in range(0, len(ref), batch):
        block = ref[start:start + batch]
        diffs = (block[:, None, :] - net[None, :, :]).reshape(-1, d)
        vals = batch_eval(spec, diffs).reshape(len(block), n)
        worst = max(worst, float(vals.min(axis=1).max()))
    return True, worst
