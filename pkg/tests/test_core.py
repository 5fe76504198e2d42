import math

import pytest
from hypothesis import given, strategies as st

from geotopk.core import (
    DomainError,
    Rect,
    ScoredResult,
    SpaceContext,
    TskQuery,
    keyword_containment,
    ranking_score,
    result_sort_key,
    spatial_proximity,
    temporal_recency,
)
from conftest import obj

BOUNDS = Rect(0.0, 0.0, 100.0, 100.0)
CTX = SpaceContext.for_bounds(BOUNDS, lambda_max=1000.0)


def test_spatial_proximity_zero_distance():
    assert spatial_proximity((42.0, 17.0), (42.0, 17.0), CTX) == 0.0


def test_spatial_proximity_diagonal_endpoints():
    assert spatial_proximity((0.0, 0.0), (100.0, 100.0), CTX) == pytest.approx(1.0)


def test_spatial_proximity_three_four_five():
    # 3-4-5 triangle: distance 50 over the sqrt(20000) diagonal
    got = spatial_proximity((0.0, 0.0), (30.0, 40.0), CTX)
    assert got == pytest.approx(0.353553, abs=1e-6)
    assert got == 50.0 / math.sqrt(20000.0)


def test_temporal_recency_examples():
    assert temporal_recency(500, 500, CTX) == 0.0
    assert temporal_recency(0, 1000, CTX) == 1.0
    assert temporal_recency(750, 1000, CTX) == 0.25
    # objects newer than the query score as "now"
    assert temporal_recency(2000, 1000, CTX) == 0.0
    # older than the window clamps at 1
    assert temporal_recency(0, 5000, CTX) == 1.0


def test_ranking_score_alpha_extremes():
    o = obj(1, [3, 7], 30.0, 40.0, 400)
    q1 = TskQuery(terms=(3,), x=0.0, y=0.0, t=1000, k=1, alpha=1.0)
    q0 = TskQuery(terms=(3,), x=0.0, y=0.0, t=1000, k=1, alpha=0.0)
    assert ranking_score(o, q1, CTX) == spatial_proximity(o.loc, q1.loc, CTX)
    assert ranking_score(o, q0, CTX) == temporal_recency(o.t, q0.t, CTX)


def test_ranking_score_midpoint():
    # f_s = 0.4 via a distance of 0.4 * diagonal, f_t = 0.2 via age 200 of 1000
    d = 0.4 * CTX.delta_max
    o = obj(1, [3], d, 0.0, 800)
    q = TskQuery(terms=(3,), x=0.0, y=0.0, t=1000, k=1, alpha=0.5)
    assert ranking_score(o, q, CTX) == pytest.approx(0.3)


def test_keyword_containment():
    assert keyword_containment((2, 5, 9), (2, 5))
    assert not keyword_containment((2, 5, 9), (2, 7))
    assert keyword_containment((2, 5, 9), (2, 5, 9))
    assert not keyword_containment((2, 5), (2, 5, 9))


def test_query_rejects_empty_terms():
    with pytest.raises(DomainError):
        TskQuery(terms=(), x=0.0, y=0.0, t=0, k=1, alpha=0.5)
    with pytest.raises(DomainError):
        TskQuery(terms=(1,), x=0.0, y=0.0, t=0, k=0, alpha=0.5)
    with pytest.raises(DomainError):
        TskQuery(terms=(1,), x=0.0, y=0.0, t=0, k=1, alpha=1.5)
    with pytest.raises(DomainError):
        TskQuery(terms=(3, 1), x=0.0, y=0.0, t=0, k=1, alpha=0.5)


coords = st.floats(min_value=0.0, max_value=100.0, allow_nan=False)
stamps = st.integers(min_value=0, max_value=10**9)
alphas = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@given(ox=coords, oy=coords, qx=coords, qy=coords, ot=stamps, qt=stamps, alpha=alphas)
def test_score_bounded(ox, oy, qx, qy, ot, qt, alpha):
    o = obj(1, [1], ox, oy, ot)
    q = TskQuery(terms=(1,), x=qx, y=qy, t=qt, k=1, alpha=alpha)
    s = ranking_score(o, q, CTX)
    assert 0.0 <= s <= 1.0 + 1e-12


@given(fs_ms=st.integers(0, 1000), ft_ms=st.integers(0, 1000), alpha=alphas)
def test_alpha_exchange_symmetry(fs_ms, ft_ms, alpha):
    # swapping alpha with 1-alpha while swapping the two components is a no-op;
    # components are built from exact millisecond fractions so both encodings
    # (distance and age) round-trip identically
    fs, ft = fs_ms / 1000.0, ft_ms / 1000.0
    d1 = fs * CTX.delta_max
    d2 = ft * CTX.delta_max
    o1 = obj(1, [1], d1 / math.sqrt(2), d1 / math.sqrt(2), 1000 - ft_ms)
    o2 = obj(2, [1], d2 / math.sqrt(2), d2 / math.sqrt(2), 1000 - fs_ms)
    q1 = TskQuery(terms=(1,), x=0.0, y=0.0, t=1000, k=1, alpha=alpha)
    q2 = TskQuery(terms=(1,), x=0.0, y=0.0, t=1000, k=1, alpha=1.0 - alpha)
    assert ranking_score(o1, q1, CTX) == pytest.approx(ranking_score(o2, q2, CTX), abs=1e-9)


results = st.builds(
    ScoredResult,
    oid=st.integers(min_value=0, max_value=50),
    score=st.floats(min_value=0, max_value=1, allow_nan=False),
    t=st.integers(min_value=0, max_value=100),
)


@given(a=results, b=results, c=results)
def test_result_order_is_strict_total_order(a, b, c):
    ka, kb, kc = result_sort_key(a), result_sort_key(b), result_sort_key(c)
    # antisymmetry
    if ka < kb:
        assert not kb < ka
    # totality: one of <, >, == holds
    assert (ka < kb) or (kb < ka) or (ka == kb)
    # keys are equal only for identical (score, t, oid)
    if ka == kb:
        assert (a.score, a.t, a.oid) == (b.score, b.t, b.oid)
    # transitivity
    if ka < kb and kb < kc:
        assert ka < kc
