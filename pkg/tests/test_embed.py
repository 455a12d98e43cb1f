import math

import numpy as np
import pytest

from bwb.embed import (FiniteMetric, bilipschitz_embed, cycle_metric,
                       embed_search, euclidean_four_point_infeasible,
                       representable_in, reverify)
from bwb.spaces import Lp


def test_metric_validation():
    with pytest.raises(ValueError):
        FiniteMetric(((0, 1), (2, 0)))  # asymmetric
    with pytest.raises(ValueError):
        FiniteMetric(((0, 5, 1), (5, 0, 1), (1, 1, 0)))  # triangle violated


def test_identity_embedding_distortion_one():
    res = embed_search(Lp(1, 2), Lp(1, 2), 1e-6, seed=0)
    assert res["found"]
    assert res["certificate"].distortion <= 1 + 1e-9


def test_l2_into_linf8():
    res = embed_search(Lp(2, 2), Lp(math.inf, 8), 0.083, seed=0)
    assert res["found"]
    assert res["certificate"].distortion <= 1.083


def test_reverify_reproduces_distortion():
    res = embed_search(Lp(2, 2), Lp(math.inf, 8), 0.083, seed=0)
    cert = res["certificate"]
    assert reverify(cert, Lp(2, 2), Lp(math.inf, 8)) == pytest.approx(
        cert.distortion, abs=1e-9)


def test_representable_in_family():
    fam = [Lp(1, 2), Lp(math.inf, 2)]
    res = representable_in(fam, Lp(math.inf, 2), 1.01, seed=0)
    assert res["representable"]


def test_cycle_into_l1_plane_isometric():
    res = bilipschitz_embed(cycle_metric(4), Lp(1, 2), 1 + 1e-6, seed=0)
    assert res["found"]
    assert res["certificate"].distortion <= 1 + 1e-6


def test_four_cycle_euclidean_obstruction():
    D = np.array(cycle_metric(4).dist)
    # below the 2^(1/4) barrier the Gram relaxation is infeasible
    assert euclidean_four_point_infeasible(D, 1.1)
    assert not euclidean_four_point_infeasible(D, 1.3)


def test_cycle_into_l2_verdicts():
    res = bilipschitz_embed(cycle_metric(4), Lp(2, 2), 1.1, seed=0)
    assert res["verdict"] == "impossible"
    res2 = bilipschitz_embed(cycle_metric(4), Lp(2, 2), 1.3, seed=0)
    assert res2["verdict"] in ("found", "not found")


def test_search_deterministic():
    a = embed_search(Lp(2, 2), Lp(math.inf, 8), 0.083, seed=5)
    b = embed_search(Lp(2, 2), Lp(math.inf, 8), 0.083, seed=5)
    assert np.array_equal(a["certificate"].data, b["certificate"].data)
