"""Domain types and ranking functions shared by every index and the oracle.

Objects are timestamped, geo-located keyword sets streaming in near time
order.  A query asks for the k objects that contain all of its keywords and
minimize a weighted sum of normalized spatial distance and normalized time
difference (smaller is better).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

TermId = int

# Result ordering: score ascending, newer timestamp first, then smaller oid.
# Encoded as a sort key so every consumer (indexes, oracle, result buffers)
# shares one comparator.


class DomainError(ValueError):
    """Raised when an input violates a documented precondition."""


class InvariantViolation(RuntimeError):
    """Raised when an internal structural invariant is found broken."""


@dataclass(frozen=True, slots=True)
class Rect:
    """Axis-aligned rectangle, closed on all edges for containment checks."""

    min_x: float
    min_y: float
    max_x: float
    max_y: float

    def __post_init__(self) -> None:
        if self.min_x > self.max_x or self.min_y > self.max_y:
            raise DomainError(f"degenerate rectangle: {self}")

    def contains(self, x: float, y: float) -> bool:
        return self.min_x <= x <= self.max_x and self.min_y <= y <= self.max_y

    def diagonal(self) -> float:
        return math.hypot(self.max_x - self.min_x, self.max_y - self.min_y)

    def min_dist(self, x: float, y: float) -> float:
        """Minimum Euclidean distance from (x, y) to the rectangle (0 inside)."""
        dx = self.min_x - x if x < self.min_x else (x - self.max_x if x > self.max_x else 0.0)
        dy = self.min_y - y if y < self.min_y else (y - self.max_y if y > self.max_y else 0.0)
        if dx == 0.0 and dy == 0.0:
            return 0.0
        return math.hypot(dx, dy)

    def cell(self, ix: int, iy: int, n: int) -> "Rect":
        """Rectangle of cell (ix, iy) in an n-by-n tiling of this rectangle."""
        w = self.max_x - self.min_x
        h = self.max_y - self.min_y
        return Rect(
            self.min_x + w * ix / n,
            self.min_y + h * iy / n,
            self.min_x + w * (ix + 1) / n,
            self.min_y + h * (iy + 1) / n,
        )


@dataclass(frozen=True, slots=True)
class GeoTextualObject:
    """One stream element: keyword set, planar location, millisecond timestamp.

    ``terms`` must be strictly ascending and non-empty; parsers and generators
    normalize before construction, so the hot path skips re-validation.
    """

    oid: int
    terms: tuple[TermId, ...]
    x: float
    y: float
    t: int

    @property
    def loc(self) -> tuple[float, float]:
        return (self.x, self.y)

    def validate(self) -> None:
        """Check invariants; used by audits, not the insert path."""
        if not self.terms:
            raise InvariantViolation(f"object {self.oid} has no terms")
        if any(a >= b for a, b in zip(self.terms, self.terms[1:])):
            raise InvariantViolation(f"object {self.oid} terms not strictly ascending")
        if self.oid < 0:
            raise InvariantViolation(f"negative oid {self.oid}")


@dataclass(frozen=True, slots=True)
class TskQuery:
    """Top-k query: keywords (all required), location, timestamp, k, alpha.

    ``alpha`` trades spatial proximity against temporal recency: 1 means
    purely spatial, 0 returns the k most recent matching objects.
    """

    terms: tuple[TermId, ...]
    x: float
    y: float
    t: int
    k: int
    alpha: float

    def __post_init__(self) -> None:
        if not self.terms:
            raise DomainError("query needs at least one keyword")
        if any(a >= b for a, b in zip(self.terms, self.terms[1:])):
            raise DomainError("query terms must be strictly ascending and duplicate-free")
        if self.k < 1:
            raise DomainError(f"k must be >= 1, got {self.k}")
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError(f"alpha must be in [0, 1], got {self.alpha}")

    @property
    def loc(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True, slots=True)
class SpaceContext:
    """Normalizers in effect for one query evaluation.

    ``delta_max`` is the diagonal of the global bounding rectangle;
    ``lambda_max`` is the temporal normalizer, recomputed per query from the
    oldest retained timestamp so temporal recency stays in [0, 1] over
    exactly the searchable window.
    """

    bounds: Rect
    delta_max: float
    lambda_max: float

    def __post_init__(self) -> None:
        if self.delta_max <= 0 or self.lambda_max <= 0:
            raise DomainError("delta_max and lambda_max must be positive")

    @classmethod
    def for_bounds(cls, bounds: Rect, lambda_max: float) -> "SpaceContext":
        return cls(bounds=bounds, delta_max=bounds.diagonal(), lambda_max=lambda_max)


@dataclass(frozen=True, slots=True)
class ScoredResult:
    oid: int
    score: float
    t: int


def result_sort_key(r: ScoredResult) -> tuple[float, int, int]:
    """Strict total order over results: score asc, timestamp desc, oid asc."""
    return (r.score, -r.t, r.oid)


def spatial_proximity(oloc: tuple[float, float], qloc: tuple[float, float], ctx: SpaceContext) -> float:
    """Euclidean distance normalized by the bounds diagonal; in [0, 1] for in-bounds points."""
    return math.hypot(oloc[0] - qloc[0], oloc[1] - qloc[1]) / ctx.delta_max


def temporal_recency(ot: int, qt: int, ctx: SpaceContext) -> float:
    """Age of the object at query time, normalized and clamped to [0, 1].

    Objects newer than the query score 0 (streaming races make that
    reachable); objects older than the window score 1.
    """
    diff = qt - ot
    if diff <= 0:
        return 0.0
    r = diff / ctx.lambda_max
    return r if r < 1.0 else 1.0


def ranking_score(o: GeoTextualObject, q: TskQuery, ctx: SpaceContext) -> float:
    """alpha-weighted sum of spatial proximity and temporal recency; smaller is better."""
    a = q.alpha
    fs = math.hypot(o.x - q.x, o.y - q.y) / ctx.delta_max
    diff = q.t - o.t
    if diff <= 0:
        ft = 0.0
    else:
        ft = diff / ctx.lambda_max
        if ft > 1.0:
            ft = 1.0
    return a * fs + (1.0 - a) * ft


def keyword_containment(oterms: tuple[TermId, ...], qterms: tuple[TermId, ...]) -> bool:
    """True iff every query term appears in the object terms.

    Linear merge over the two sorted duplicate-free lists.
    """
    i = 0
    n = len(oterms)
    for qt in qterms:
        while i < n and oterms[i] < qt:
            i += 1
        if i >= n or oterms[i] != qt:
            return False
        i += 1
    return True
