"""Best-first top-k search across segments, plus the brute-force oracle.

A min-heap orders tree nodes by their score lower bound; segment roots are
opened lazily, oldest last, whenever the next root could be the global
minimum, so popped keys are non-decreasing over the whole run and the
running k-th-best score can prune safely.  Nodes failing the index's
textual test never enter the heap; objects surviving the leaf test are
verified by exact keyword containment before scoring, so filter false
positives cost node accesses but never change results.
"""
from __future__ import annotations

import heapq
from bisect import insort
from dataclasses import dataclass, field
from math import inf

from .core import (
    ScoredResult,
    SpaceContext,
    TskQuery,
    ranking_score,
    result_sort_key,
)
from .gridtree import lower_bound_score


@dataclass(slots=True)
class SearchTrace:
    """Work counters for one search run.

    ``signature_rejections`` counts textual-filter rejections whatever the
    filter is (signature subset test or inverted-file lookup).
    """

    nodes_accessed: int = 0
    objects_scored: int = 0
    signature_rejections: int = 0
    segments_opened: int = 0
    popped_keys: list[float] | None = None

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (
            self.nodes_accessed,
            self.objects_scored,
            self.signature_rejections,
            self.segments_opened,
        )


class _ResultBuffer:
    """Best-k buffer under the shared result order; exposes the k-th best score."""

    __slots__ = ("k", "items")

    def __init__(self, k: int) -> None:
        self.k = k
        self.items: list[tuple[tuple, ScoredResult]] = []

    def offer(self, r: ScoredResult) -> None:
        insort(self.items, (result_sort_key(r), r))
        if len(self.items) > self.k:
            self.items.pop()

    @property
    def threshold(self) -> float:
        if len(self.items) < self.k:
            return inf
        return self.items[-1][1].score

    def results(self) -> list[ScoredResult]:
        return [r for _, r in self.items]


def search_top_k(
    index,
    q: TskQuery,
    *,
    use_filter: bool = True,
    record_pops: bool = False,
) -> tuple[list[ScoredResult], SearchTrace]:
    """Exact top-k search over every retained segment of ``index``.

    Returns at most k results in result order, together with the trace.
    ``use_filter=False`` disables the textual pruning (exact verification
    still runs); used to measure how much work the filter saves.
    """
    trace = SearchTrace(popped_keys=[] if record_pops else None)
    with index.lock():
        ctx = index.context_for(q)
        trees = index.search_trees()
        qstate = index.query_state(q)
        buf = _ResultBuffer(q.k)
        heap: list[tuple[float, int, object]] = []
        tick = 0
        next_tree = 0

        while True:
            # open older segment roots while one could be the global minimum;
            # roots share the full bounds rectangle, so their bounds only grow
            # with segment age and the scan can stop for good past the threshold
            while next_tree < len(trees):
                root = trees[next_tree].root
                key = lower_bound_score(q, root, ctx)
                if key > buf.threshold:
                    next_tree = len(trees)
                    break
                if heap and key > heap[0][0]:
                    break
                heapq.heappush(heap, (key, tick, root))
                tick += 1
                trace.segments_opened += 1
                next_tree += 1
            if not heap:
                break
            key, _, node = heapq.heappop(heap)
            if key > buf.threshold:
                break
            if trace.popped_keys is not None:
                trace.popped_keys.append(key)
            trace.nodes_accessed += 1
            if node.children is None:
                for obj in index.leaf_matches(node, qstate, q, trace, use_filter):
                    score = ranking_score(obj, q, ctx)
                    trace.objects_scored += 1
                    if score <= buf.threshold:
                        buf.offer(ScoredResult(oid=obj.oid, score=score, t=obj.t))
            else:
                threshold = buf.threshold
                for child in node.children:
                    if child is None or child.latest_t is None:
                        continue
                    if use_filter and not index.node_test(child, qstate):
                        trace.signature_rejections += 1
                        continue
                    ckey = lower_bound_score(q, child, ctx)
                    if ckey <= threshold:
                        heapq.heappush(heap, (ckey, tick, child))
                        tick += 1
        return buf.results(), trace


def brute_force_topk(objects, q: TskQuery, ctx: SpaceContext) -> list[ScoredResult]:
    """Definitional evaluation: filter by containment, score all, sort, truncate.

    Must be handed the same context the index under test derives for ``q``.
    """
    qset = frozenset(q.terms)
    scored = [
        ScoredResult(oid=o.oid, score=ranking_score(o, q, ctx), t=o.t)
        for o in objects
        if qset.issubset(o.terms)
    ]
    scored.sort(key=result_sort_key)
    return scored[: q.k]
