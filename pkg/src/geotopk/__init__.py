"""Streaming in-memory index for top-k temporal spatial keyword search.

The main structure is a chronologically segmented sequence of grid-trees
whose nodes carry frequency superimposed-coding signatures; two inverted
file quadtree baselines (IFQ, SIFQ) share the tree and search machinery.
A brute-force oracle and a benchmark harness round out the package.
"""

__version__ = "0.1.0"

from .baselines import InvertedQuadtreeIndex, SegmentedInvertedIndex
from .config import INDEX_KINDS, RunConfig, make_index
from .core import (
    DomainError,
    GeoTextualObject,
    InvariantViolation,
    Rect,
    ScoredResult,
    SpaceContext,
    TskQuery,
    keyword_containment,
    ranking_score,
    result_sort_key,
    spatial_proximity,
    temporal_recency,
)
from .gridtree import GridConfig, GridTree, audit_tree, lower_bound_score
from .search import SearchTrace, brute_force_topk, search_top_k
from .signature import (
    BlockLayout,
    FrequencyTable,
    Signature,
    SignatureConfig,
    SignatureFactory,
    build_block_layout,
    object_signature,
    subset_test,
    superimpose,
    term_bit_positions,
)
from .stream import Segment, SegmentedSignatureIndex

__all__ = [
    "BlockLayout",
    "DomainError",
    "FrequencyTable",
    "GeoTextualObject",
    "GridConfig",
    "GridTree",
    "INDEX_KINDS",
    "InvariantViolation",
    "InvertedQuadtreeIndex",
    "Rect",
    "RunConfig",
    "ScoredResult",
    "SearchTrace",
    "Segment",
    "SegmentedInvertedIndex",
    "SegmentedSignatureIndex",
    "Signature",
    "SignatureConfig",
    "SignatureFactory",
    "SpaceContext",
    "TskQuery",
    "audit_tree",
    "brute_force_topk",
    "build_block_layout",
    "keyword_containment",
    "lower_bound_score",
    "make_index",
    "object_signature",
    "ranking_score",
    "result_sort_key",
    "search_top_k",
    "spatial_proximity",
    "subset_test",
    "superimpose",
    "temporal_recency",
    "term_bit_positions",
]
