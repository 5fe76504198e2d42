"""Synthetic corpus generation.

Desk-scale stand-in for a real geo-tagged message stream: Zipf-distributed
vocabulary, roughly ten distinct terms per object, strictly increasing
millisecond timestamps, and either uniform or clustered locations.  All
output is deterministic for a seed; the same seed yields byte-identical
files.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DomainError, Rect
from .fileio import ObjectRow

DEFAULT_BOUNDS = Rect(0.0, 0.0, 100.0, 100.0)

SPATIAL_MODELS = ("uniform", "gaussian-clusters")


@dataclass(frozen=True, slots=True)
class SynthSpec:
    count: int
    zipf_s: float = 1.0
    term_universe: int = 10_000
    spatial: str = "uniform"
    seed: int = 0
    bounds: Rect = DEFAULT_BOUNDS
    mean_terms: float = 10.0
    mean_gap_ms: float = 10.0
    clusters: int = 8
    start_t: int = 0

    def __post_init__(self) -> None:
        if self.count < 1:
            raise DomainError(f"count must be >= 1, got {self.count}")
        if self.term_universe < 1:
            raise DomainError(f"term universe must be >= 1, got {self.term_universe}")
        if self.zipf_s < 0:
            raise DomainError(f"zipf exponent must be >= 0, got {self.zipf_s}")
        if self.spatial not in SPATIAL_MODELS:
            raise DomainError(f"spatial model must be one of {SPATIAL_MODELS}")
        if self.mean_terms < 1 or self.mean_gap_ms < 1 or self.clusters < 1:
            raise DomainError("mean_terms, mean_gap_ms and clusters must be >= 1")


def zipf_probabilities(universe: int, s: float) -> np.ndarray:
    """P(rank r) proportional to r**-s for ranks 1..universe."""
    ranks = np.arange(1, universe + 1, dtype=np.float64)
    weights = ranks ** -s
    return weights / weights.sum()


class _RankPool:
    """Batched Zipf rank draws; refills deterministically from one generator."""

    def __init__(self, cdf: np.ndarray, rng: np.random.Generator, batch: int) -> None:
        self._cdf = cdf
        self._rng = rng
        self._batch = max(batch, 1024)
        self._buf = np.empty(0, dtype=np.int64)
        self._pos = 0

    def next(self) -> int:
        if self._pos >= len(self._buf):
            self._buf = np.searchsorted(self._cdf, self._rng.random(self._batch))
            self._pos = 0
        rank = int(self._buf[self._pos])
        self._pos += 1
        return rank


def generate_objects(spec: SynthSpec) -> list[ObjectRow]:
    """Generate object rows (tokens are `w<rank>`, rank 1 the hottest)."""
    rng = np.random.default_rng(spec.seed)
    count = spec.count
    bounds = spec.bounds

    gaps = np.maximum(1, np.rint(rng.exponential(spec.mean_gap_ms, count))).astype(np.int64)
    ts = spec.start_t + np.cumsum(gaps)

    n_terms = np.maximum(1, rng.poisson(spec.mean_terms, count)).astype(np.int64)
    n_terms = np.minimum(n_terms, spec.term_universe)

    if spec.spatial == "uniform":
        xs = rng.uniform(bounds.min_x, bounds.max_x, count)
        ys = rng.uniform(bounds.min_y, bounds.max_y, count)
    else:
        centers_x = rng.uniform(bounds.min_x, bounds.max_x, spec.clusters)
        centers_y = rng.uniform(bounds.min_y, bounds.max_y, spec.clusters)
        assign = rng.integers(0, spec.clusters, count)
        sx = 0.02 * (bounds.max_x - bounds.min_x)
        sy = 0.02 * (bounds.max_y - bounds.min_y)
        xs = np.clip(centers_x[assign] + rng.normal(0.0, sx, count), bounds.min_x, bounds.max_x)
        ys = np.clip(centers_y[assign] + rng.normal(0.0, sy, count), bounds.min_y, bounds.max_y)

    cdf = np.cumsum(zipf_probabilities(spec.term_universe, spec.zipf_s))
    pool = _RankPool(cdf, rng, batch=int(n_terms.sum() * 1.3) + 1024)

    token_cache: dict[int, str] = {}  # one shared string per rank keeps big corpora small
    rows: list[ObjectRow] = []
    for i in range(count):
        want = int(n_terms[i])
        ranks: set[int] = set()
        while len(ranks) < want:
            ranks.add(pool.next())
        tokens = tuple(
            token_cache.get(r) or token_cache.setdefault(r, f"w{r + 1}")
            for r in sorted(ranks)
        )
        rows.append((i, int(ts[i]), float(xs[i]), float(ys[i]), tokens))
    return rows
