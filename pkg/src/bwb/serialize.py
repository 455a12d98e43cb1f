"""JSON round-tripping of space descriptors and related objects.

Every descriptor serializes to a dict with a ``kind`` discriminant.
Rational entries are written as "num/den" strings and survive a
parse -> serialize round trip byte-identically (canonical form: sorted
keys, compact separators).
"""

from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np

from .spaces import (
    DirectSum,
    DiscreteLp,
    FiniteCK,
    Lp,
    NormSpec,
    PolytopeByFacets,
    PolytopeByGenerators,
    Pullback,
    Quotient,
)


def _num_out(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if math.isinf(x):
        return "inf"
    if x.is_integer():
        return int(x)
    return x


def _num_in(x):
    if isinstance(x, str):
        if x == "inf":
            return math.inf
        num, den = x.split("/")
        return Fraction(int(num), int(den))
    return x


def _matrix_out(rows):
    return [[_num_out(x) for x in row] for row in rows]


def _matrix_in(rows):
    return tuple(tuple(_num_in(x) for x in row) for row in rows)


def spec_to_dict(spec: NormSpec) -> dict:
    if isinstance(spec, Lp):
        return {"kind": "lp", "p": _num_out(spec.p), "dim": spec.n}
    if isinstance(spec, PolytopeByGenerators):
        return {
            "kind": "polytope_generators",
            "generators": _matrix_out(spec.generators),
            "dim": spec.ambient_dim,
        }
    if isinstance(spec, PolytopeByFacets):
        return {
            "kind": "polytope_facets",
            "facets": _matrix_out(spec.facets),
            "dim": spec.ambient_dim,
        }
    if isinstance(spec, Pullback):
        return {
            "kind": "pullback",
            "matrix": _matrix_out(spec.matrix),
            "host": spec_to_dict(spec.host),
        }
    if isinstance(spec, DirectSum):
        return {
            "kind": "direct_sum",
            "p": _num_out(spec.p),
            "parts": [spec_to_dict(part) for part in spec.parts],
        }
    if isinstance(spec, Quotient):
        return {
            "kind": "quotient",
            "host": spec_to_dict(spec.host),
            "subspace": _matrix_out(spec.subspace_basis),
        }
    if isinstance(spec, DiscreteLp):
        return {
            "kind": "discrete_lp",
            "p": _num_out(spec.p),
            "weights": [_num_out(w) for w in spec.weights],
        }
    if isinstance(spec, FiniteCK):
        return {"kind": "finite_ck", "table": _matrix_out(spec.table)}
    raise ValueError(f"unknown spec type {type(spec).__name__}")


def spec_from_dict(d: dict) -> NormSpec:
    kind = d["kind"]
    if kind == "lp":
        p = _num_in(d["p"])
        return Lp(p=float(p), n=int(d["dim"]))
    if kind == "polytope_generators":
        return PolytopeByGenerators(generators=_matrix_in(d["generators"]), ambient_dim=int(d["dim"]))
    if kind == "polytope_facets":
        return PolytopeByFacets(facets=_matrix_in(d["facets"]), ambient_dim=int(d["dim"]))
    if kind == "pullback":
        return Pullback(matrix=_matrix_in(d["matrix"]), host=spec_from_dict(d["host"]))
    if kind == "direct_sum":
        return DirectSum(p=float(_num_in(d["p"])), parts=tuple(spec_from_dict(x) for x in d["parts"]))
    if kind == "quotient":
        return Quotient(host=spec_from_dict(d["host"]), subspace_basis=_matrix_in(d["subspace"]))
    if kind == "discrete_lp":
        return DiscreteLp(p=float(_num_in(d["p"])), weights=tuple(_num_in(w) for w in d["weights"]))
    if kind == "finite_ck":
        return FiniteCK(table=_matrix_in(d["table"]))
    raise ValueError(f"unknown descriptor kind {kind!r}")


def dumps_canonical(obj) -> str:
    """Canonical JSON text: sorted keys, no whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def spec_dumps(spec: NormSpec) -> str:
    return dumps_canonical(spec_to_dict(spec))


def spec_loads(text: str) -> NormSpec:
    return spec_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# auxiliary blocks: tail-budget sets, finite metrics, pseudonorm codes


def _frac_out(x) -> str:
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator}"


def tail_budget_to_dict(tb) -> dict:
    def affine_out(a):
        return {"const": _frac_out(a.const),
                "coeffs": [_frac_out(c) for c in a.coeffs]}

    return {
        "kind": "tail_budget",
        "head_dim": tb.head_dim,
        "constraints": [affine_out(a) for a in tb.constraints],
        "budget": [affine_out(a) for a in tb.budget],
    }


def tail_budget_from_dict(d):
    from .szlenk import TailBudgetSet

    if d.get("kind") != "tail_budget":
        raise ValueError("not a tail_budget block")

    def affine_in(a):
        return (_num_in(a["const"]), [_num_in(c) for c in a["coeffs"]])

    return TailBudgetSet.make(
        int(d["head_dim"]),
        [affine_in(a) for a in d["constraints"]],
        [affine_in(a) for a in d["budget"]],
    )


def metric_to_dict(metric) -> dict:
    return {"kind": "finite_metric", "dist": _matrix_out(metric.dist)}


def metric_from_dict(d):
    from .embed import FiniteMetric

    if d.get("kind") != "finite_metric":
        raise ValueError("not a finite_metric block")
    return FiniteMetric(dist=_matrix_in(d["dist"]))


def code_to_dict(code) -> dict:
    return {
        "kind": "pseudonorm_code",
        "host": spec_to_dict(code.host),
        "images": _matrix_out(code.images),
    }


def code_from_dict(d):
    from .coding import PseudonormCode

    if d.get("kind") != "pseudonorm_code":
        raise ValueError("not a pseudonorm_code block")
    return PseudonormCode(host=spec_from_dict(d["host"]),
                          images=_matrix_in(d["images"]))
