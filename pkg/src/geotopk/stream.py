"""Segmented streaming index: sealed grid-trees plus one active tree.

The stream is partitioned into count-based windows: the active segment
absorbs inserts until it holds P objects, is then sealed (immutable from
that point on), and a fresh active segment opens.  Retention drops whole
oldest segments once the sealed total exceeds W — per-object deletion is
impossible here because OR-superimposed signatures cannot be decremented,
which is the reason the window is segmented at all.

Writers and readers are serialized through one lock; every search therefore
sees a consistent snapshot.  Sealed segments are immutable and freely
shareable across threads.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, replace

from .core import (
    DomainError,
    GeoTextualObject,
    Rect,
    SpaceContext,
    TskQuery,
    keyword_containment,
)
from .gridtree import GridConfig, GridTree
from .signature import BlockLayout, SignatureConfig, SignatureFactory
from .stats import IndexStats, signature_payload_bytes, tree_costs


class SigAggregator:
    """Node payload = int bitset; contribution token = the object's signature bits."""

    @staticmethod
    def empty_leaf() -> int:
        return 0

    @staticmethod
    def add_leaf(payload: int, obj, token: int) -> int:
        return payload | token

    add_inner = add_leaf

    @staticmethod
    def promote(payload: int, entries) -> int:
        return payload  # OR of entries already equals the leaf bits

    @staticmethod
    def remove_leaf(payload, obj, token):
        raise DomainError("signature trees do not support per-object removal")

    remove_inner = remove_leaf


@dataclass(slots=True)
class Segment:
    tree: GridTree
    min_t: int | None = None
    max_t: int | None = None
    count: int = 0
    sealed: bool = False

    def absorb(self, obj: GeoTextualObject) -> None:
        if self.min_t is None:
            self.min_t = obj.t
        self.max_t = obj.t if self.max_t is None else max(self.max_t, obj.t)
        self.count += 1


class SegmentedIndexBase:
    """Shared segment bookkeeping for the signature index and SIFQ."""

    kind = "segmented"

    def __init__(
        self,
        bounds: Rect,
        grid_cfg: GridConfig,
        segment_capacity: int,
        retention: int,
    ) -> None:
        if segment_capacity < 1:
            raise DomainError(f"segment capacity must be >= 1, got {segment_capacity}")
        if retention < 0:
            raise DomainError(f"retention must be >= 0, got {retention}")
        self.bounds = bounds
        self.grid_cfg = grid_cfg
        self.segment_capacity = segment_capacity
        self.retention = retention
        self.delta_max = bounds.diagonal()
        self.segments: list[Segment] = [self._new_segment()]  # newest first
        self.monotonicity_violations = 0
        self.inserted = 0
        self.evicted = 0
        self._last_t: int | None = None
        self._lock = threading.RLock()

    # subclasses provide the tree payload machinery
    def _new_segment(self) -> Segment:
        raise NotImplementedError

    def _token_for(self, obj: GeoTextualObject) -> int:
        raise NotImplementedError

    @property
    def active(self) -> Segment:
        return self.segments[0]

    def insert(self, obj: GeoTextualObject) -> None:
        """Insert one stream element; seals and evicts as windows fill.

        A full active segment is sealed lazily, at the start of the insert
        that would overflow it, and eviction runs before the fresh segment
        opens, so the retained count never exceeds W + P.
        """
        with self._lock:
            if not self.bounds.contains(obj.x, obj.y):
                raise DomainError(
                    f"object {obj.oid} at ({obj.x}, {obj.y}) outside index bounds"
                )
            if self._last_t is not None and obj.t < self._last_t:
                obj = replace(obj, t=self._last_t)
                self.monotonicity_violations += 1
            self._last_t = obj.t
            active = self.segments[0]
            if active.count >= self.segment_capacity:
                active.sealed = True
                self.evict_expired()
                active = self._new_segment()
                self.segments.insert(0, active)
            active.tree.insert(obj, self._token_for(obj))
            active.absorb(obj)
            self.inserted += 1
            self.evict_expired()

    def evict_expired(self) -> int:
        """Drop whole oldest sealed segments until their total is within retention."""
        with self._lock:
            sealed_total = sum(s.count for s in self.segments if s.sealed)
            dropped = 0
            while sealed_total > self.retention:
                oldest = self.segments.pop()
                if not oldest.sealed:
                    raise DomainError("active segment cannot be evicted")
                sealed_total -= oldest.count
                dropped += oldest.count
            self.evicted += dropped
            return dropped

    def object_count(self) -> int:
        return sum(s.count for s in self.segments)

    def oldest_t(self) -> int | None:
        for seg in reversed(self.segments):
            if seg.min_t is not None:
                return seg.min_t
        return None

    def newest_t(self) -> int | None:
        for seg in self.segments:
            if seg.max_t is not None:
                return seg.max_t
        return None

    def retained_objects(self):
        """All currently searchable objects (audit/oracle support)."""
        with self._lock:
            for seg in self.segments:
                yield from seg.tree.iter_objects()

    def context_for(self, q: TskQuery) -> SpaceContext:
        """Per-query normalizers: window age becomes the temporal unit."""
        oldest = self.oldest_t()
        lam = 1.0 if oldest is None else max(1.0, float(q.t - oldest))
        return SpaceContext(bounds=self.bounds, delta_max=self.delta_max, lambda_max=lam)

    # --- search protocol ------------------------------------------------
    def lock(self):
        return self._lock

    def search_trees(self) -> list[GridTree]:
        """Non-empty segment trees, newest first."""
        return [s.tree for s in self.segments if s.count > 0]

    def query_state(self, q: TskQuery):
        raise NotImplementedError

    def node_test(self, node, qstate) -> bool:
        raise NotImplementedError

    def leaf_matches(self, node, qstate, q: TskQuery, trace, use_filter: bool):
        raise NotImplementedError


class SegmentedSignatureIndex(SegmentedIndexBase):
    """Sequence of signature grid-trees over a count-based stream window."""

    kind = "ssg"

    def __init__(
        self,
        bounds: Rect,
        sig_cfg: SignatureConfig,
        grid_cfg: GridConfig,
        layout: BlockLayout,
        segment_capacity: int,
        retention: int,
    ) -> None:
        self.sig_cfg = sig_cfg
        self.layout = layout
        self.factory = SignatureFactory(layout, sig_cfg)
        super().__init__(bounds, grid_cfg, segment_capacity, retention)

    def _new_segment(self) -> Segment:
        return Segment(tree=GridTree(self.bounds, self.grid_cfg, SigAggregator()))

    def _token_for(self, obj: GeoTextualObject) -> int:
        return self.factory.terms_bits(obj.terms)

    def query_state(self, q: TskQuery) -> int:
        return self.factory.terms_bits(q.terms)

    def node_test(self, node, qstate: int) -> bool:
        return qstate & ~node.text == 0

    def leaf_matches(self, node, qstate: int, q: TskQuery, trace, use_filter: bool):
        qterms = q.terms
        for obj, token in node.entries:
            if use_filter and qstate & ~token != 0:
                trace.signature_rejections += 1
                continue
            if keyword_containment(obj.terms, qterms):
                yield obj

    def stats(self) -> IndexStats:
        with self._lock:
            payload = signature_payload_bytes(self.sig_cfg.bits)
            nodes = node_b = obj_b = text_b = 0
            for seg in self.segments:
                n, nb, ob, tb = tree_costs(seg.tree, payload)
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
