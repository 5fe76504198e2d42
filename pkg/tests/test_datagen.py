import logging
import math
from collections import Counter

import numpy as np
import pytest

from geotopk.core import DomainError, Rect
from geotopk.datagen import SynthSpec, generate_objects, zipf_probabilities
from geotopk.fileio import (
    read_object_file,
    read_query_file,
    write_object_file,
    write_query_file,
)
from geotopk.workload import (
    WorkloadSpec,
    build_workload,
    frequency_cdf,
    sample_token_index,
    token_frequencies,
)


def test_zero_count_rejected():
    with pytest.raises(DomainError):
        SynthSpec(count=0)


def test_same_seed_byte_identical(tmp_path):
    a, b = tmp_path / "a.tsv", tmp_path / "b.tsv"
    write_object_file(a, generate_objects(SynthSpec(count=500, seed=21)))
    write_object_file(b, generate_objects(SynthSpec(count=500, seed=21)))
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.tsv"
    write_object_file(c, generate_objects(SynthSpec(count=500, seed=22)))
    assert a.read_bytes() != c.read_bytes()


def test_object_file_round_trip(tmp_path):
    rows = generate_objects(SynthSpec(count=200, seed=4))
    path = tmp_path / "objs.tsv"
    write_object_file(path, rows)
    back = read_object_file(path)
    assert len(back) == len(rows)
    assert back[0][0] == rows[0][0]
    assert back[0][4] == rows[0][4]
    assert back[17][1] == rows[17][1]
    assert back[17][2] == pytest.approx(rows[17][2], abs=1e-6)


def test_timestamps_strictly_increasing_and_locations_bounded():
    for spatial in ("uniform", "gaussian-clusters"):
        rows = generate_objects(SynthSpec(count=2000, seed=8, spatial=spatial))
        ts = [r[1] for r in rows]
        assert all(a < b for a, b in zip(ts, ts[1:]))
        bounds = Rect(0.0, 0.0, 100.0, 100.0)
        assert all(bounds.contains(r[2], r[3]) for r in rows)


def test_mean_terms_close_to_ten():
    rows = generate_objects(SynthSpec(count=20_000, seed=15))
    mean = sum(len(r[4]) for r in rows) / len(rows)
    assert 9.5 <= mean <= 10.5
    assert all(len(set(r[4])) == len(r[4]) for r in rows[:200])  # distinct within object


def test_zipf_rank_curve_slope():
    # log-log slope over mid ranks should sit near the configured exponent;
    # within-object dedup flattens only the very head of the curve
    rows = generate_objects(SynthSpec(count=100_000, seed=3, term_universe=10_000))
    counts = Counter()
    for r in rows:
        counts.update(r[4])
    freqs = sorted(counts.values(), reverse=True)
    lo, hi = 20, 2000
    ranks = np.arange(lo, min(hi, len(freqs)))
    ys = np.array([freqs[r] for r in ranks], dtype=np.float64)
    slope = np.polyfit(np.log(ranks), np.log(ys), 1)[0]
    assert abs(slope - (-1.0)) <= 0.1, f"fitted slope {slope}"


def test_default_workload_shape(small_corpus):
    queries = build_workload(small_corpus, WorkloadSpec(seed=5))
    assert len(queries) == 1000
    qt = max(r[1] for r in small_corpus)
    locs = {(r[2], r[3]) for r in small_corpus}
    for qid, t, x, y, k, alpha, tokens in queries[:50]:
        assert len(tokens) == 3
        assert len(set(tokens)) == 3
        assert k == 10 and alpha == 0.5
        assert t == qt
        assert (x, y) in locs


def test_workload_deterministic(small_corpus, tmp_path):
    a = build_workload(small_corpus, WorkloadSpec(query_count=100, seed=6))
    b = build_workload(small_corpus, WorkloadSpec(query_count=100, seed=6))
    assert a == b
    p = tmp_path / "q.tsv"
    write_query_file(p, a)
    assert read_query_file(p) == [
        (qid, t, pytest.approx(x, abs=1e-6), pytest.approx(y, abs=1e-6), k, pytest.approx(alpha), toks)
        for qid, t, x, y, k, alpha, toks in a
    ]


def test_single_term_corpus_clamps_l_with_warning(caplog):
    rows = [(i, i + 1, 10.0, 10.0, ("solo",)) for i in range(20)]
    with caplog.at_level(logging.WARNING):
        queries = build_workload(rows, WorkloadSpec(query_count=5, l=3, seed=0))
    assert any("distinct terms" in r.message for r in caplog.records)
    assert all(q[6] == ("solo",) for q in queries)


def test_keyword_sampler_matches_frequencies_within_3_sigma(small_corpus):
    counts = token_frequencies(small_corpus)
    tokens, cdf = frequency_cdf(counts)
    probs = np.diff(np.concatenate([[0.0], cdf]))
    rng = np.random.default_rng(123)
    n = 100_000
    draws = Counter(sample_token_index(cdf, rng) for _ in range(n))
    # chi-square goodness of fit over the well-populated terms, with the
    # sparse tail pooled into one cell; the statistic must sit within 3 sigma
    # of its chi-square mean.  Individually, one in ~370 terms may poke past
    # a 3-sigma band by chance, so per-term we allow a small exceedance count.
    chi2 = 0.0
    cells = 0
    exceed = 0
    tail_obs = tail_exp = 0.0
    for i, p in enumerate(probs):
        expected = n * p
        observed = draws.get(i, 0)
        if expected < 50:
            tail_obs += observed
            tail_exp += expected
            continue
        chi2 += (observed - expected) ** 2 / expected
        cells += 1
        if abs(observed - expected) > 3 * math.sqrt(n * p * (1 - p)):
            exceed += 1
    if tail_exp > 0:
        chi2 += (tail_obs - tail_exp) ** 2 / tail_exp
        cells += 1
    df = cells - 1
    assert cells >= 20
    assert chi2 <= df + 3 * math.sqrt(2 * df), f"chi2={chi2:.1f} df={df}"
    assert exceed <= max(2, cells // 50)


def test_zipf_probabilities_normalized():
    p = zipf_probabilities(1000, 1.0)
    assert p.sum() == pytest.approx(1.0)
    assert p[0] > p[1] > p[99]
