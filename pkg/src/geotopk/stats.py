"""Shared memory estimator and index statistics.

One cost model is used for every index family so storage comparisons are
apples-to-apples.  The model charges a compact C-style layout, not Python
object overhead: fixed-width slots for pointers and ids, array headers for
growable lists, and hash-entry costs for map and set members.
"""
from __future__ import annotations

from dataclasses import dataclass, field

PTR_BYTES = 8          # pointer or object-id slot
ID_BYTES = 4           # packed term id
LIST_HEADER_BYTES = 24  # growable array: data ptr + length + capacity
MAP_ENTRY_BYTES = 24   # hash map entry: key + value + bucket overhead
SET_ENTRY_BYTES = 16   # hash set entry: key + bucket overhead
NODE_BASE_BYTES = 56   # rectangle (4 doubles) + latest timestamp + tag/link


@dataclass(slots=True)
class IndexStats:
    kind: str
    segments: int
    objects: int
    nodes: int
    textual_bytes: int      # signatures or inverted files
    node_bytes: int         # tree skeleton
    object_bytes: int       # object store (ids, coords, timestamps, term lists)
    oldest_t: int | None
    newest_t: int | None
    monotonicity_violations: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def total_bytes(self) -> int:
        return self.textual_bytes + self.node_bytes + self.object_bytes

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "segments": self.segments,
            "objects": self.objects,
            "nodes": self.nodes,
            "textual_bytes": self.textual_bytes,
            "node_bytes": self.node_bytes,
            "object_bytes": self.object_bytes,
            "total_bytes": self.total_bytes,
            "oldest_t": self.oldest_t,
            "newest_t": self.newest_t,
            "monotonicity_violations": self.monotonicity_violations,
            **self.extra,
        }


def tree_costs(tree, payload_bytes) -> tuple[int, int, int, int]:
    """Walk a tree once; returns (nodes, node_bytes, object_bytes, textual_bytes)."""
    fan = tree.cfg.fanout * tree.cfg.fanout
    nodes = 0
    node_bytes = 0
    object_bytes = 0
    textual_bytes = 0
    for node in tree.iter_nodes():
        nodes += 1
        node_bytes += NODE_BASE_BYTES
        if node.children is None:
            node_bytes += LIST_HEADER_BYTES + len(node.entries) * PTR_BYTES
            for obj, _ in node.entries:
                object_bytes += (
                    PTR_BYTES          # oid
                    + 16               # x, y
                    + PTR_BYTES        # timestamp
                    + LIST_HEADER_BYTES
                    + ID_BYTES * len(obj.terms)
                )
        else:
            node_bytes += fan * PTR_BYTES
        textual_bytes += payload_bytes(node)
    return nodes, node_bytes, object_bytes, textual_bytes


def signature_payload_bytes(width_bits: int):
    """Every node holds one signature; every leaf entry holds one more."""
    sig = width_bits // 8

    def cost(node) -> int:
        if node.children is None:
            return sig * (1 + len(node.entries))
        return sig

    return cost


def inverted_payload_bytes(node) -> int:
    """Presence entries on inner nodes; term lists plus postings on leaves."""
    payload = node.text
    if node.children is None:
        total = 0
        for postings in payload.values():
            total += MAP_ENTRY_BYTES + LIST_HEADER_BYTES + len(postings) * PTR_BYTES
        return total
    if isinstance(payload, dict):
        return len(payload) * MAP_ENTRY_BYTES  # refcounted presence (deletable)
    return len(payload) * SET_ENTRY_BYTES      # plain presence set
