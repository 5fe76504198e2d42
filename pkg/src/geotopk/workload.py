"""Query workload construction.

Keywords are sampled i.i.d. proportionally to their corpus frequency
(deduplicated within a query, resampling on collision), locations are drawn
uniformly from the object locations, and every query is stamped with the
corpus's newest timestamp.
"""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .core import DomainError
from .fileio import ObjectRow, QueryRow

log = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class WorkloadSpec:
    query_count: int = 1000
    l: int = 3
    k: int = 10
    alpha: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.query_count < 1 or self.l < 1 or self.k < 1:
            raise DomainError("query_count, l and k must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError(f"alpha must be in [0, 1], got {self.alpha}")


def token_frequencies(rows: list[ObjectRow]) -> Counter:
    counts: Counter = Counter()
    for _, _, _, _, tokens in rows:
        counts.update(tokens)
    return counts


def frequency_cdf(counts: Counter) -> tuple[list[str], np.ndarray]:
    """Tokens with their cumulative selection probabilities, frequency-ordered."""
    items = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    tokens = [tok for tok, _ in items]
    weights = np.array([c for _, c in items], dtype=np.float64)
    return tokens, np.cumsum(weights / weights.sum())


def sample_token_index(cdf: np.ndarray, rng: np.random.Generator) -> int:
    """One frequency-proportional draw; the unit the workload sampler is built from."""
    return int(np.searchsorted(cdf, rng.random()))


def build_workload(rows: list[ObjectRow], spec: WorkloadSpec) -> list[QueryRow]:
    if not rows:
        raise DomainError("cannot build a workload from an empty object file")
    counts = token_frequencies(rows)
    tokens, cdf = frequency_cdf(counts)

    l = spec.l
    if l > len(tokens):
        log.warning(
            "workload requests %d keywords but the corpus has only %d distinct terms; using l=%d",
            l, len(tokens), len(tokens),
        )
        l = len(tokens)

    qt = max(row[1] for row in rows)
    rng = np.random.default_rng(spec.seed)
    queries: list[QueryRow] = []
    for qid in range(spec.query_count):
        chosen: set[int] = set()
        while len(chosen) < l:
            chosen.add(sample_token_index(cdf, rng))
        kw = tuple(sorted(tokens[i] for i in chosen))
        at = rows[int(rng.integers(0, len(rows)))]
        queries.append((qid, qt, at[2], at[3], spec.k, spec.alpha, kw))
    return queries
