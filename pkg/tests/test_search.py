import pytest

from geotopk.config import RunConfig, make_index
from geotopk.core import SpaceContext, TskQuery
from geotopk.fileio import query_from_row
from geotopk.search import brute_force_topk, search_top_k

from conftest import ingest, obj

MULTISEG = RunConfig(P=400, W=1600, c=20)


def test_empty_index_returns_nothing():
    index = make_index("ssg", RunConfig())
    q = TskQuery(terms=(1,), x=50.0, y=50.0, t=100, k=10, alpha=0.5)
    results, trace = search_top_k(index, q)
    assert results == []
    assert trace.nodes_accessed == 0


def test_k_exceeding_matches_returns_all_matches_in_order():
    index = make_index("ssg", RunConfig(P=50, W=1000, c=4))
    for i in range(40):
        terms = [1, 2] if i % 3 == 0 else [2, 3]
        index.insert(obj(i, terms, (i * 7) % 100, (i * 13) % 100, i + 1))
    q = TskQuery(terms=(1, 2), x=30.0, y=30.0, t=100, k=1000, alpha=0.5)
    results, _ = search_top_k(index, q)
    expected = brute_force_topk(index.retained_objects(), q, index.context_for(q))
    assert [(r.oid, r.score) for r in results] == [(r.oid, r.score) for r in expected]
    assert {r.oid for r in results} == {i for i in range(40) if i % 3 == 0}


def test_score_ties_resolved_newer_then_smaller_oid():
    index = make_index("ssg", RunConfig(P=100, W=1000))
    for i in range(5):
        index.insert(obj(i, [4], 25.0, 25.0, 10))  # identical location and time
    q = TskQuery(terms=(4,), x=60.0, y=60.0, t=10, k=3, alpha=0.5)
    results, _ = search_top_k(index, q)
    assert [r.oid for r in results] == [0, 1, 2]
    assert len({r.score for r in results}) == 1


@pytest.mark.parametrize("kind", ["ssg", "ifq", "sifq"])
def test_matches_oracle_across_segments_and_eviction(kind, small_corpus, small_workload):
    index, vocab = ingest(kind, MULTISEG, small_corpus)
    assert index.evicted > 0  # eviction must actually be exercised
    for qrow in small_workload:
        q = query_from_row(qrow, vocab)
        got, _ = search_top_k(index, q)
        want = brute_force_topk(index.retained_objects(), q, index.context_for(q))
        assert [(r.oid, r.score, r.t) for r in got] == [(r.oid, r.score, r.t) for r in want]


def test_popped_keys_nondecreasing_across_segments(small_corpus, small_workload):
    index, vocab = ingest("ssg", MULTISEG, small_corpus)
    for qrow in small_workload[:20]:
        q = query_from_row(qrow, vocab)
        _, trace = search_top_k(index, q, record_pops=True)
        keys = trace.popped_keys
        assert all(a <= b + 1e-15 for a, b in zip(keys, keys[1:]))
        assert trace.segments_opened <= len(index.segments)


def test_filtering_never_increases_node_accesses(small_corpus, small_workload):
    index, vocab = ingest("ssg", MULTISEG, small_corpus)
    for qrow in small_workload:
        q = query_from_row(qrow, vocab)
        on, t_on = search_top_k(index, q, use_filter=True)
        off, t_off = search_top_k(index, q, use_filter=False)
        assert [r.oid for r in on] == [r.oid for r in off]
        assert t_on.nodes_accessed <= t_off.nodes_accessed


def test_brute_force_trivial_cases():
    ctx = SpaceContext.for_bounds(RunConfig().bounds, lambda_max=100.0)
    objs = [obj(1, [1, 2], 10.0, 10.0, 50), obj(2, [2, 3], 20.0, 20.0, 60)]
    nothing = brute_force_topk(objs, TskQuery(terms=(9,), x=0, y=0, t=100, k=5, alpha=0.5), ctx)
    assert nothing == []
    only = brute_force_topk(objs, TskQuery(terms=(1,), x=0, y=0, t=100, k=5, alpha=0.5), ctx)
    assert [r.oid for r in only] == [1]


def test_brute_force_alpha_zero_is_most_recent(small_corpus):
    index, vocab = ingest("ssg", RunConfig(), small_corpus)
    objs = list(index.retained_objects())
    term = objs[0].terms[0]
    q = TskQuery(terms=(term,), x=50.0, y=50.0, t=max(o.t for o in objs), k=10, alpha=0.0)
    got = brute_force_topk(objs, q, index.context_for(q))
    matching = sorted((o for o in objs if term in o.terms), key=lambda o: (-o.t, o.oid))
    assert [r.oid for r in got] == [o.oid for o in matching[:10]]
    # and the index agrees
    via_index, _ = search_top_k(index, q)
    assert [r.oid for r in via_index] == [r.oid for r in got]
