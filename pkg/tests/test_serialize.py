import json
import math
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from bwb.coding import PseudonormCode
from bwb.embed import cycle_metric
from bwb.serialize import (code_from_dict, code_to_dict, dumps_canonical,
                           metric_from_dict, metric_to_dict, spec_dumps,
                           spec_from_dict, spec_loads, spec_to_dict,
                           tail_budget_from_dict, tail_budget_to_dict)
from bwb.spaces import (DirectSum, DiscreteLp, FiniteCK, Lp, PolytopeByFacets,
                        PolytopeByGenerators, Pullback, Quotient)
from bwb.szlenk import TailBudgetSet

ALL_KINDS = [
    Lp(1.5, 3),
    Lp(math.inf, 2),
    PolytopeByGenerators(((Fraction(1, 2), 0), (0, 1)), 2),
    PolytopeByFacets(((1, 1), (1, -1)), 2),
    Pullback(((1, 0), (0, 1), (1, 1)), Lp(1, 3)),
    DirectSum(1, (Lp(2, 2), Lp(1, 1))),
    Quotient(Lp(1, 3), ((1.0, 1.0, 1.0),)),
    DiscreteLp(2, (1, Fraction(1, 3), 2)),
    FiniteCK(((1, 0), (0.5, 0.5))),
]


def test_round_trip_byte_identical():
    for spec in ALL_KINDS:
        text = spec_dumps(spec)
        assert spec_dumps(spec_loads(text)) == text


def test_rationals_written_as_num_den():
    spec = PolytopeByGenerators(((Fraction(1, 3), 0), (0, 1)), 2)
    data = json.loads(spec_dumps(spec))
    assert data["generators"][0][0] == "1/3"


def test_canonical_form_sorted_compact():
    text = spec_dumps(Lp(2, 2))
    assert " " not in text
    keys = list(json.loads(text).keys())
    assert keys == sorted(keys)


def test_infinity_encoding():
    text = spec_dumps(Lp(math.inf, 4))
    assert json.loads(text)["p"] == "inf"
    assert math.isinf(spec_loads(text).p)


@settings(max_examples=40, deadline=None)
@given(st.floats(1, 50), st.integers(1, 8))
def test_lp_round_trip_float_p(p, n):
    spec = Lp(p, n)
    text = spec_dumps(spec)
    assert spec_dumps(spec_loads(text)) == text


def test_tail_budget_block():
    tb = TailBudgetSet.make(1, [(1, [-1]), (1, [1])],
                            [(Fraction(1, 2), [Fraction(1, 3)])])
    d = tail_budget_to_dict(tb)
    text = dumps_canonical(d)
    assert dumps_canonical(tail_budget_to_dict(tail_budget_from_dict(d))) == text


def test_metric_block():
    m = cycle_metric(5)
    d = metric_to_dict(m)
    assert dumps_canonical(metric_to_dict(metric_from_dict(d))) == dumps_canonical(d)


def test_code_block():
    code = PseudonormCode(Lp(1, 2), ((1.0, 0.0), (0.5, 0.5)))
    d = code_to_dict(code)
    assert dumps_canonical(code_to_dict(code_from_dict(d))) == dumps_canonical(d)
