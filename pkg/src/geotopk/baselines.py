"""Inverted-file comparison indexes sharing the grid-tree and search skeleton.

IFQ keeps every retained object in a single quadtree whose cells carry
inverted files: term-presence on inner cells, per-term posting lists on
leaves.  Retention is enforced by true per-object removal, which is exactly
the cost asymmetry the segmented designs avoid.  SIFQ is the segmented
variant: identical per-segment structure, sealed and evicted in whole
windows like the signature index.

Pruning replaces the signature subset test: a node passes iff every query
term is present in its inverted file, which admits no false positives.
"""
from __future__ import annotations

import threading
from collections import deque
from dataclasses import replace

from .core import (
    DomainError,
    GeoTextualObject,
    Rect,
    SpaceContext,
    TskQuery,
    keyword_containment,
)
from .gridtree import GridConfig, GridTree
from .stats import IndexStats, inverted_payload_bytes, tree_costs
from .stream import Segment, SegmentedIndexBase


class InvertedAggregator:
    """Leaf payload: term -> chronological posting list of objects.

    Inner payload: term presence, refcounted (dict term -> subtree count)
    when per-object removal must be supported, a plain set otherwise.
    """

    __slots__ = ("track_counts",)

    def __init__(self, track_counts: bool) -> None:
        self.track_counts = track_counts

    @staticmethod
    def empty_leaf() -> dict:
        return {}

    @staticmethod
    def add_leaf(payload: dict, obj: GeoTextualObject, token: int) -> dict:
        for term in obj.terms:
            postings = payload.get(term)
            if postings is None:
                payload[term] = [obj]
            else:
                postings.append(obj)
        return payload

    def add_inner(self, payload, obj: GeoTextualObject, token: int):
        if self.track_counts:
            for term in obj.terms:
                payload[term] = payload.get(term, 0) + 1
        else:
            payload.update(obj.terms)
        return payload

    def promote(self, payload: dict, entries):
        if self.track_counts:
            return {term: len(postings) for term, postings in payload.items()}
        return set(payload.keys())

    @staticmethod
    def remove_leaf(payload: dict, obj: GeoTextualObject, token: int) -> dict:
        for term in obj.terms:
            postings = payload[term]
            if postings and postings[0].oid == obj.oid:
                postings.pop(0)  # the oldest object sits at the front
            else:
                postings.remove(obj)
            if not postings:
                del payload[term]
        return payload

    def remove_inner(self, payload, obj: GeoTextualObject, token: int):
        if not self.track_counts:
            raise DomainError("presence sets are not deletable; use refcounted presence")
        for term in obj.terms:
            left = payload[term] - 1
            if left:
                payload[term] = left
            else:
                del payload[term]
        return payload


def _leaf_posting_matches(node, q: TskQuery, trace, use_filter: bool):
    """Yield leaf objects containing all query terms, via the shortest posting list."""
    if not use_filter:
        for obj, _ in node.entries:
            if keyword_containment(obj.terms, q.terms):
                yield obj
        return
    postings = node.text
    shortest = None
    for term in q.terms:
        lst = postings.get(term)
        if lst is None:
            trace.signature_rejections += 1
            return
        if shortest is None or len(lst) < len(shortest):
            shortest = lst
    for obj in shortest:
        if keyword_containment(obj.terms, q.terms):
            yield obj
        else:
            trace.signature_rejections += 1


def _inverted_node_test(node, qterms) -> bool:
    payload = node.text
    for term in qterms:
        if term not in payload:
            return False
    return True


class InvertedQuadtreeIndex:
    """IFQ: one quadtree over all retained objects, per-object expiry."""

    kind = "ifq"

    def __init__(self, bounds: Rect, grid_cfg: GridConfig, retention: int) -> None:
        if retention < 1:
            raise DomainError(f"retention must be >= 1 for per-object expiry, got {retention}")
        self.bounds = bounds
        self.grid_cfg = grid_cfg
        self.retention = retention
        self.delta_max = bounds.diagonal()
        self.tree = GridTree(bounds, grid_cfg, InvertedAggregator(track_counts=True))
        self._order: deque[GeoTextualObject] = deque()
        self.monotonicity_violations = 0
        self.inserted = 0
        self.evicted = 0
        self._last_t: int | None = None
        self._lock = threading.RLock()

    def insert(self, obj: GeoTextualObject) -> None:
        with self._lock:
            if not self.bounds.contains(obj.x, obj.y):
                raise DomainError(
                    f"object {obj.oid} at ({obj.x}, {obj.y}) outside index bounds"
                )
            if self._last_t is not None and obj.t < self._last_t:
                obj = replace(obj, t=self._last_t)
                self.monotonicity_violations += 1
            self._last_t = obj.t
            self.tree.insert(obj, 0)
            self._order.append(obj)
            self.inserted += 1
            while self.tree.n_objects > self.retention:
                oldest = self._order.popleft()
                self.tree.remove_oldest_at(oldest)
                self.evicted += 1

    def object_count(self) -> int:
        return self.tree.n_objects

    def oldest_t(self) -> int | None:
        return self._order[0].t if self._order else None

    def newest_t(self) -> int | None:
        return self._order[-1].t if self._order else None

    def retained_objects(self):
        with self._lock:
            yield from self.tree.iter_objects()

    def context_for(self, q: TskQuery) -> SpaceContext:
        oldest = self.oldest_t()
        lam = 1.0 if oldest is None else max(1.0, float(q.t - oldest))
        return SpaceContext(bounds=self.bounds, delta_max=self.delta_max, lambda_max=lam)

    def lock(self):
        return self._lock

    def search_trees(self) -> list[GridTree]:
        return [self.tree] if self.tree.n_objects else []

    def query_state(self, q: TskQuery):
        return q.terms

    def node_test(self, node, qstate) -> bool:
        return _inverted_node_test(node, qstate)

    def leaf_matches(self, node, qstate, q: TskQuery, trace, use_filter: bool):
        return _leaf_posting_matches(node, q, trace, use_filter)

    def stats(self) -> IndexStats:
        with self._lock:
            nodes, node_b, obj_b, text_b = tree_costs(self.tree, inverted_payload_bytes)
            return IndexStats(
                kind=self.kind,
                segments=1,
                objects=self.object_count(),
                nodes=nodes,
                textual_bytes=text_b,
                node_bytes=node_b,
                object_bytes=obj_b,
                oldest_t=self.oldest_t(),
                newest_t=self.newest_t(),
                monotonicity_violations=self.monotonicity_violations,
            )


class SegmentedInvertedIndex(SegmentedIndexBase):
    """SIFQ: inverted-file quadtrees sealed and evicted in whole segments."""

    kind = "sifq"

    def __init__(
        self,
        bounds: Rect,
        grid_cfg: GridConfig,
        segment_capacity: int,
        retention: int,
    ) -> None:
        super().__init__(bounds, grid_cfg, segment_capacity, retention)

    def _new_segment(self) -> Segment:
        return Segment(tree=GridTree(self.bounds, self.grid_cfg, InvertedAggregator(track_counts=False)))

    def _token_for(self, obj: GeoTextualObject) -> int:
        return 0

    def query_state(self, q: TskQuery):
        return q.terms

    def node_test(self, node, qstate) -> bool:
        return _inverted_node_test(node, qstate)

    def leaf_matches(self, node, qstate, q: TskQuery, trace, use_filter: bool):
        return _leaf_posting_matches(node, q, trace, use_filter)

    def stats(self) -> IndexStats:
        with self._lock:
            nodes = node_b = obj_b = text_b = 0
            for seg in self.segments:
                n, nb, ob, tb = tree_costs(seg.tree, inverted_payload_bytes)
                nodes += n
                node_b += nb
                obj_b += ob
                text_b += tb
            return IndexStats(
                kind=self.kind,
                segments=len(self.segments),
                objects=self.object_count(),
                nodes=nodes,
                textual_bytes=text_b,
                node_bytes=node_b,
                object_bytes=obj_b,
                oldest_t=self.oldest_t(),
                newest_t=self.newest_t(),
                monotonicity_violations=self.monotonicity_violations,
            )
