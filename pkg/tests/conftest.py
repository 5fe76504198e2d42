from __future__ import annotations

import numpy as np
import pytest

from geotopk.bench import build_index
from geotopk.config import RunConfig
from geotopk.core import GeoTextualObject
from geotopk.datagen import SynthSpec, generate_objects
from geotopk.fileio import Vocabulary, object_from_row
from geotopk.gridtree import lower_bound_score
from geotopk.workload import WorkloadSpec, build_workload


def obj(oid, terms, x, y, t) -> GeoTextualObject:
    return GeoTextualObject(oid=oid, terms=tuple(sorted(set(terms))), x=x, y=y, t=t)


def ingest(kind: str, cfg: RunConfig, rows):
    """Build an index from rows the way the bench driver does."""
    vocab = Vocabulary()
    index = build_index(kind, cfg, rows, vocab)
    for row in rows:
        index.insert(object_from_row(row, vocab))
    return index, vocab


@pytest.fixture(scope="session")
def small_corpus():
    """3k objects over a 2k-term universe; enough to split trees and segments."""
    return generate_objects(SynthSpec(count=3000, seed=11, term_universe=2000))


@pytest.fixture(scope="session")
def small_workload(small_corpus):
    return build_workload(small_corpus, WorkloadSpec(query_count=60, seed=13))


class TreeScoreCache:
    """Vectorized oracle for the bound property: for every node, the lower
    bound must not exceed the smallest ranking score among its descendants.

    Scores are recomputed independently (numpy) from raw coordinates and
    timestamps, not taken from the search path.
    """

    def __init__(self, tree):
        xs, ys, ts = [], [], []
        self.leaf_idx = {}
        for leaf in tree.iter_leaves():
            idx = []
            for o, _ in leaf.entries:
                idx.append(len(xs))
                xs.append(o.x)
                ys.append(o.y)
                ts.append(o.t)
            self.leaf_idx[id(leaf)] = np.array(idx, dtype=np.int64)
        self.xs = np.array(xs)
        self.ys = np.array(ys)
        self.ts = np.array(ts, dtype=np.float64)
        self.tree = tree

    def check_bound_dominance(self, q, ctx, slack=1e-12) -> int:
        """Returns nodes checked; raises AssertionError on any violation."""
        scores = q.alpha * np.hypot(self.xs - q.x, self.ys - q.y) / ctx.delta_max + (
            1.0 - q.alpha
        ) * np.clip((q.t - self.ts) / ctx.lambda_max, 0.0, 1.0)
        checked = 0

        def visit(node):
            nonlocal checked
            if node.children is None:
                idx = self.leaf_idx[id(node)]
                best = float(scores[idx].min()) if len(idx) else None
            else:
                mins = [m for c in node.children if c is not None for m in [visit(c)] if m is not None]
                best = min(mins) if mins else None
            if best is not None:
                lb = lower_bound_score(q, node, ctx)
                assert lb <= best + slack, (
                    f"lower bound {lb} exceeds best descendant score {best} "
                    f"at node {node.rect} (alpha={q.alpha})"
                )
                checked += 1
            return best

        visit(self.tree.root)
        return checked
