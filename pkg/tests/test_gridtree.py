import random

import pytest

from geotopk.core import DomainError, InvariantViolation, Rect, SpaceContext, TskQuery
from geotopk.gridtree import GridConfig, GridNode, GridTree, _axis_cell, audit_tree, lower_bound_score
from geotopk.stream import SigAggregator

from conftest import TreeScoreCache, obj

BOUNDS = Rect(0.0, 0.0, 100.0, 100.0)


def sig_tree(c=2, n=2, max_depth=12, bounds=BOUNDS):
    return GridTree(bounds, GridConfig(fanout=n, leaf_capacity=c, max_depth=max_depth), SigAggregator())


def check_sig_aggregation(node, parts):
    if node.children is None:
        expect = 0
        for _, token in parts:
            expect |= token
    else:
        expect = 0
        for child in parts:
            expect |= child.text
    assert node.text == expect, "node bits are not the OR of the level below"


def test_single_insert_base_case():
    tree = sig_tree()
    tree.insert(obj(1, [2, 5], 10.0, 10.0, 100), 0b1010)
    assert tree.root.is_leaf
    assert tree.root.entry_count() == 1
    assert tree.root.text == 0b1010
    assert tree.root.latest_t == 100
    audit_tree(tree, check_sig_aggregation)


def test_three_quadrants_split():
    # hand trace: c=2, n=2; the third insert overflows the root, which splits
    # into 4 cells; (10,10) -> cell 0, (60,10) -> cell 1, (10,60) -> cell 2
    tree = sig_tree(c=2)
    tree.insert(obj(1, [1], 10.0, 10.0, 1), 0b001)
    tree.insert(obj(2, [2], 60.0, 10.0, 2), 0b010)
    assert tree.root.is_leaf
    tree.insert(obj(3, [3], 10.0, 60.0, 3), 0b100)
    root = tree.root
    assert not root.is_leaf
    assert len(root.children) == 4
    occupied = [i for i, ch in enumerate(root.children) if ch is not None]
    assert occupied == [0, 1, 2]
    assert root.children[0].entries[0][0].oid == 1
    assert root.children[1].entries[0][0].oid == 2
    assert root.children[2].entries[0][0].oid == 3
    # post-split: OR of children equals the pre-split bits
    assert root.text == 0b111
    audit_tree(tree, check_sig_aggregation)


def test_boundary_point_goes_to_larger_index():
    # half-open cells: a point on the shared edge belongs to the higher cell
    assert _axis_cell(0.0, 100.0, 2, 50.0) == 1
    assert _axis_cell(0.0, 100.0, 2, 49.999999) == 0
    # the last cell is closed
    assert _axis_cell(0.0, 100.0, 2, 100.0) == 1
    assert _axis_cell(0.0, 100.0, 4, 75.0) == 3


def test_colocated_objects_stop_splitting_at_max_depth():
    tree = sig_tree(c=2, max_depth=3)
    for i in range(10):
        tree.insert(obj(i, [1], 33.0, 33.0, i), 0b1)
    leaves = [leaf for leaf in tree.iter_leaves() if leaf.entries]
    assert len(leaves) == 1
    assert leaves[0].depth == 3
    assert leaves[0].entry_count() == 10  # overflow permitted at the cutoff
    audit_tree(tree, check_sig_aggregation)


def test_saturated_bits_unchanged_by_duplicate_terms():
    tree = sig_tree(c=10)
    tree.insert(obj(1, [1], 5.0, 5.0, 1), 0b11)
    before = tree.root.text
    tree.insert(obj(2, [1], 6.0, 6.0, 2), 0b11)
    assert tree.root.text == before


def test_insert_outside_bounds_rejected():
    tree = sig_tree()
    with pytest.raises(DomainError):
        tree.insert(obj(1, [1], 150.0, 10.0, 1), 0b1)


def test_lower_bound_examples():
    ctx = SpaceContext.for_bounds(BOUNDS, lambda_max=1000.0)
    node = GridNode(Rect(0.0, 0.0, 10.0, 10.0), 1, 0)
    node.latest_t = 500

    inside = TskQuery(terms=(1,), x=5.0, y=5.0, t=500, k=1, alpha=0.5)
    assert lower_bound_score(inside, node, ctx) == 0.0

    spatial_only = TskQuery(terms=(1,), x=13.0, y=14.0, t=0, k=1, alpha=1.0)
    assert lower_bound_score(spatial_only, node, ctx) == pytest.approx(5.0 / ctx.delta_max)

    empty = GridNode(Rect(0.0, 0.0, 10.0, 10.0), 1, 0)
    with pytest.raises(InvariantViolation):
        lower_bound_score(inside, empty, ctx)


def test_lower_bound_temporal_component_clamped():
    # a node far older than the window must not out-score a clamped object
    ctx = SpaceContext.for_bounds(BOUNDS, lambda_max=100.0)
    node = GridNode(Rect(0.0, 0.0, 10.0, 10.0), 1, 0)
    node.latest_t = 0
    q = TskQuery(terms=(1,), x=5.0, y=5.0, t=10_000, k=1, alpha=0.0)
    assert lower_bound_score(q, node, ctx) == 1.0


def _random_tree(rng, count, c=16, n=2, max_depth=8):
    tree = sig_tree(c=c, n=n, max_depth=max_depth)
    for i in range(count):
        tree.insert(
            obj(i, [rng.randrange(50) for _ in range(rng.randrange(1, 6))],
                rng.uniform(0, 100), rng.uniform(0, 100), i),
            rng.getrandbits(64),
        )
    return tree


def test_random_tree_audits_clean():
    rng = random.Random(5)
    for count in (10, 300, 1500):
        tree = _random_tree(rng, count)
        report = audit_tree(tree, check_sig_aggregation)
        assert report["objects"] == count


def test_bound_dominates_every_descendant_score():
    # small version of the bound-vs-score sweep (the acceptance suite scales it up)
    rng = random.Random(99)
    tree = _random_tree(rng, 1200, c=8)
    cache = TreeScoreCache(tree)
    for _ in range(25):
        q = TskQuery(
            terms=(1,),
            x=rng.uniform(0, 100), y=rng.uniform(0, 100),
            t=rng.randrange(0, 2000), k=5,
            alpha=rng.choice([0.0, 0.25, 0.5, 0.75, 1.0]),
        )
        ctx = SpaceContext.for_bounds(BOUNDS, lambda_max=rng.uniform(1, 3000))
        assert cache.check_bound_dominance(q, ctx) > 0
