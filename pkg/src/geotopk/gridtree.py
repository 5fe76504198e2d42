"""Space-partitioning tree with n-squared-way splits.

Every node carries a rectangle, the latest timestamp in its subtree, and a
textual payload (a signature bitset or an inverted file, supplied by an
aggregator so both index families share this code).  Overflowing leaves
split into n*n equal non-overlapping cells; n=2 recovers the quadtree.

Cell ownership is half-open per axis ([lo, hi) except the last cell, which
is closed), so every point maps to exactly one cell.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import (
    DomainError,
    GeoTextualObject,
    InvariantViolation,
    Rect,
    SpaceContext,
    TskQuery,
)


@dataclass(frozen=True, slots=True)
class GridConfig:
    fanout: int = 2          # cells per axis n
    leaf_capacity: int = 100  # c
    max_depth: int = 12       # split cutoff; deeper leaves may overflow

    def __post_init__(self) -> None:
        if self.fanout < 2:
            raise DomainError(f"fanout must be >= 2, got {self.fanout}")
        if self.leaf_capacity < 1:
            raise DomainError(f"leaf capacity must be >= 1, got {self.leaf_capacity}")
        if self.max_depth < 0:
            raise DomainError(f"max depth must be >= 0, got {self.max_depth}")


class GridNode:
    """Leaf (children is None) or inner node of the grid-tree.

    ``text`` is the aggregated textual payload; ``latest_t`` is None only
    while the node is empty.  Leaf entries are stored oldest first, so
    reversed iteration is reverse-chronological.
    """

    __slots__ = ("rect", "depth", "children", "entries", "text", "latest_t")

    def __init__(self, rect: Rect, depth: int, text) -> None:
        self.rect = rect
        self.depth = depth
        self.children: list[GridNode | None] | None = None
        self.entries: list[tuple[GeoTextualObject, int]] | None = []
        self.text = text
        self.latest_t: int | None = None

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    def entry_count(self) -> int:
        return len(self.entries) if self.entries is not None else 0

    def entries_newest_first(self):
        if self.entries is None:
            return iter(())
        return reversed(self.entries)


def _axis_cell(lo: float, hi: float, n: int, v: float) -> int:
    """Cell index of v along one axis, consistent with Rect.cell boundaries."""
    i = int((v - lo) * n / (hi - lo))
    if i < 0:
        i = 0
    elif i >= n:
        i = n - 1
    # correct float fuzz against the authoritative boundary formula
    span = hi - lo
    if v < lo + span * i / n:
        i -= 1
    elif i + 1 < n and v >= lo + span * (i + 1) / n:
        i += 1
    return i


class GridTree:
    """Single-writer tree; immutable (and freely shareable) once sealed."""

    def __init__(self, bounds: Rect, cfg: GridConfig, agg) -> None:
        self.bounds = bounds
        self.cfg = cfg
        self.agg = agg
        self.root = GridNode(bounds, 0, agg.empty_leaf())
        self.n_objects = 0
        self.n_nodes = 1

    def insert(self, obj: GeoTextualObject, token: int) -> None:
        """Insert an object; ``token`` is the payload contribution (e.g. its signature bits)."""
        if not self.bounds.contains(obj.x, obj.y):
            raise DomainError(
                f"object {obj.oid} at ({obj.x}, {obj.y}) lies outside {self.bounds}"
            )
        agg = self.agg
        n = self.cfg.fanout
        node = self.root
        while True:
            if node.latest_t is None or obj.t > node.latest_t:
                node.latest_t = obj.t
            if node.children is None:
                node.text = agg.add_leaf(node.text, obj, token)
                node.entries.append((obj, token))
                self.n_objects += 1
                if len(node.entries) > self.cfg.leaf_capacity and node.depth < self.cfg.max_depth:
                    self._split(node)
                return
            node.text = agg.add_inner(node.text, obj, token)
            rect = node.rect
            ix = _axis_cell(rect.min_x, rect.max_x, n, obj.x)
            iy = _axis_cell(rect.min_y, rect.max_y, n, obj.y)
            idx = iy * n + ix
            child = node.children[idx]
            if child is None:
                child = GridNode(rect.cell(ix, iy, n), node.depth + 1, agg.empty_leaf())
                node.children[idx] = child
                self.n_nodes += 1
            node = child

    def _split(self, leaf: GridNode) -> None:
        """Turn an overflowing leaf into an inner node with n*n children."""
        agg = self.agg
        n = self.cfg.fanout
        rect = leaf.rect
        entries = leaf.entries
        leaf.children = [None] * (n * n)
        leaf.entries = None
        leaf.text = agg.promote(leaf.text, entries)
        for obj, token in entries:  # chronological order is preserved per child
            ix = _axis_cell(rect.min_x, rect.max_x, n, obj.x)
            iy = _axis_cell(rect.min_y, rect.max_y, n, obj.y)
            idx = iy * n + ix
            child = leaf.children[idx]
            if child is None:
                child = GridNode(rect.cell(ix, iy, n), leaf.depth + 1, agg.empty_leaf())
                leaf.children[idx] = child
                self.n_nodes += 1
            child.text = agg.add_leaf(child.text, obj, token)
            child.entries.append((obj, token))
            if child.latest_t is None or obj.t > child.latest_t:
                child.latest_t = obj.t
        for child in leaf.children:
            if (
                child is not None
                and len(child.entries) > self.cfg.leaf_capacity
                and child.depth < self.cfg.max_depth
            ):
                self._split(child)

    def path_to_leaf(self, x: float, y: float) -> list[GridNode]:
        """Root-to-leaf path of nodes whose cells own (x, y)."""
        n = self.cfg.fanout
        node = self.root
        path = [node]
        while node.children is not None:
            rect = node.rect
            ix = _axis_cell(rect.min_x, rect.max_x, n, x)
            iy = _axis_cell(rect.min_y, rect.max_y, n, y)
            child = node.children[iy * n + ix]
            if child is None:
                raise InvariantViolation(f"no leaf owns point ({x}, {y})")
            path.append(child)
            node = child
        return path

    def remove_oldest_at(self, obj: GeoTextualObject) -> None:
        """Remove one object (the globally oldest) and repair path aggregates.

        Only payloads that support removal may be used with this (the
        signature aggregator refuses: OR-superimposed bits cannot be unset).
        """
        agg = self.agg
        path = self.path_to_leaf(obj.x, obj.y)
        leaf = path[-1]
        hit = None
        for i, (entry, token) in enumerate(leaf.entries):
            if entry.oid == obj.oid:
                hit = (i, token)
                break
        if hit is None:
            raise InvariantViolation(f"object {obj.oid} not found in its leaf")
        i, token = hit
        leaf.entries.pop(i)
        leaf.text = agg.remove_leaf(leaf.text, obj, token)
        self.n_objects -= 1
        for node in path[:-1]:
            node.text = agg.remove_inner(node.text, obj, token)
        # repair latest_t bottom-up; removing the oldest only matters when a
        # subtree empties out
        leaf.latest_t = max((e.t for e, _ in leaf.entries), default=None)
        for node in reversed(path[:-1]):
            node.latest_t = max(
                (c.latest_t for c in node.children if c is not None and c.latest_t is not None),
                default=None,
            )

    def iter_nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if node.children is not None:
                stack.extend(c for c in node.children if c is not None)

    def iter_leaves(self):
        for node in self.iter_nodes():
            if node.children is None:
                yield node

    def iter_objects(self):
        for leaf in self.iter_leaves():
            for obj, _ in leaf.entries:
                yield obj


def lower_bound_score(q: TskQuery, node: GridNode, ctx: SpaceContext) -> float:
    """Lower bound on the ranking score of any object in the node's subtree.

    Spatial part: minimum Euclidean distance from the query point to the
    node's rectangle, normalized.  Temporal part: the age of the subtree's
    newest object, normalized and clamped like temporal_recency so the bound
    never exceeds a clamped object score.
    """
    if node.latest_t is None:
        raise InvariantViolation("lower bound requested for an empty node")
    a = q.alpha
    fs = node.rect.min_dist(q.x, q.y) / ctx.delta_max
    diff = q.t - node.latest_t
    if diff <= 0:
        ft = 0.0
    else:
        ft = diff / ctx.lambda_max
        if ft > 1.0:
            ft = 1.0
    return a * fs + (1.0 - a) * ft


def audit_tree(tree: GridTree, check_payload=None) -> dict:
    """Verify structural invariants; returns counters or raises.

    Checks: children tile their parent's rect per the cell formula, every
    leaf's rect contains its objects, leaf entries are chronological, leaf
    sizes respect capacity (except at max depth), and latest_t aggregates
    correctly.  ``check_payload(node, children_or_entries)`` may add a
    payload-specific check (nsig aggregation, inverted-file consistency).
    """
    n = tree.cfg.fanout
    seen_objects = 0
    seen_nodes = 0

    def visit(node: GridNode) -> tuple[int | None, int]:
        nonlocal seen_objects, seen_nodes
        seen_nodes += 1
        if node.children is None:
            count = len(node.entries)
            seen_objects += count
            last_t = None
            for obj, _ in node.entries:
                if not node.rect.contains(obj.x, obj.y):
                    raise InvariantViolation(
                        f"object {obj.oid} outside its leaf rect {node.rect}"
                    )
                if last_t is not None and obj.t < last_t:
                    raise InvariantViolation("leaf entries out of chronological order")
                last_t = obj.t
            if count > tree.cfg.leaf_capacity and node.depth < tree.cfg.max_depth:
                raise InvariantViolation("overfull leaf below max depth")
            expect_latest = max((o.t for o, _ in node.entries), default=None)
            if node.latest_t != expect_latest:
                raise InvariantViolation("leaf latest_t does not match entries")
            if check_payload is not None:
                check_payload(node, node.entries)
            return node.latest_t, count
        child_latest: list[int] = []
        count = 0
        for i, child in enumerate(node.children):
            if child is None:
                continue
            iy, ix = divmod(i, n)
            if child.rect != node.rect.cell(ix, iy, n):
                raise InvariantViolation(f"child {i} rect does not tile parent {node.rect}")
            if child.depth != node.depth + 1:
                raise InvariantViolation("child depth mismatch")
            lt, ct = visit(child)
            if lt is not None:
                child_latest.append(lt)
            count += ct
        expect_latest = max(child_latest, default=None)
        if node.latest_t != expect_latest:
            raise InvariantViolation("inner latest_t does not match children")
        if check_payload is not None:
            check_payload(node, [c for c in node.children if c is not None])
        return node.latest_t, count

    _, total = visit(tree.root)
    if total != tree.n_objects:
        raise InvariantViolation(
            f"reachable objects {total} != recorded count {tree.n_objects}"
        )
    if seen_nodes != tree.n_nodes:
        raise InvariantViolation(f"walked {seen_nodes} nodes, recorded {tree.n_nodes}")
    return {"nodes": seen_nodes, "objects": seen_objects}
