import math

import numpy as np
import pytest

from lemnikit.errors import LevelAtCriticalValue
from lemnikit.poly import Polynomial, find_roots
from lemnikit.topology import build_merge_tree, components_at_level, descent_flow, locate_point

from oracles import flood_partition, non_critical_levels, random_polynomial

Z2 = Polynomial((-1, 0, 1))
COUNTER = Polynomial((0, 0, -0.75, 0.5))


def test_merge_tree_z2_minus_1():
    tree = build_merge_tree(Z2)
    assert tree.critical_levels == (0.0, 1.0, math.inf)
    (ev,) = tree.merge_events
    assert ev.level == 1.0 and ev.saddle == 0 and ev.groups == ((0,), (1,))


def test_merge_tree_counterexample():
    tree = build_merge_tree(COUNTER)
    (ev,) = tree.merge_events
    assert ev.level == pytest.approx(0.25) and ev.saddle == pytest.approx(1)
    assert sorted(ev.groups) == [(0,), (1,)]
    assert tree.zeros.roots[0] == (0j, 2)


def test_merge_tree_monomial_has_no_events():
    tree = build_merge_tree(Polynomial.monomial(3))
    assert tree.merge_events == () and tree.critical_levels == (0.0, math.inf)


def test_four_way_merge():
    # z^4 - 1: the order-3 saddle at 0 joins all four zeros at level 1
    tree = build_merge_tree(Polynomial((-1, 0, 0, 0, 1)))
    (ev,) = tree.merge_events
    assert ev.level == pytest.approx(1.0)
    assert sorted(ev.groups) == [(0,), (1,), (2,), (3,)]


def test_components_counterexample():
    (comp,) = components_at_level(build_merge_tree(COUNTER), COUNTER, 1.0)
    assert not comp.eligible
    assert comp.anchor_zero == 0 and comp.multiplicity == 3
    assert [cp.location for cp in comp.proper_criticals_inside] == [pytest.approx(1)]
    low = components_at_level(build_merge_tree(COUNTER), COUNTER, 0.2)
    assert sorted(c.anchor_zero.real for c in low) == [0.0, pytest.approx(1.5)]
    assert all(c.eligible for c in low)


def test_level_at_critical_value_rejected():
    with pytest.raises(LevelAtCriticalValue):
        components_at_level(build_merge_tree(Z2), Z2, 1.0 + 1e-6)


def test_descent_flow_reaches_nearest_basin():
    assert descent_flow(Z2, 0.1) == pytest.approx(1)
    assert descent_flow(Z2, -0.1) == pytest.approx(-1)
    # on either side of the saddle of the counterexample
    assert descent_flow(COUNTER, 1.001) == pytest.approx(1.5)
    assert descent_flow(COUNTER, 0.999) == 0


def test_locate_point():
    tree = build_merge_tree(COUNTER)
    comp = locate_point(tree, COUNTER, 2.0, 1.0)  # on the boundary |P(2)| = 1
    assert comp is not None and not comp.eligible
    assert locate_point(tree, COUNTER, 3.0, 1.0) is None
    assert locate_point(tree, COUNTER, 1.4, 0.2).anchor_zero == pytest.approx(1.5)


def test_clusters_at():
    tree = build_merge_tree(Z2)
    assert tree.clusters_at(0.5) == [(0,), (1,)]
    assert tree.clusters_at(2.0) == [(0, 1)]


def test_json_writes_inf_as_string():
    doc = build_merge_tree(Z2).to_json()
    assert doc["critical_levels"] == [0.0, 1.0, "inf"]


@pytest.mark.parametrize("seed", range(10))
def test_components_match_flood_fill(seed):
    rng = np.random.default_rng(1000 + seed)
    P = random_polynomial(rng, int(rng.integers(2, 7)), min_sep=0.1)
    tree = build_merge_tree(P)
    zeros = find_roots(P).locations
    for t in non_critical_levels(tree.critical_levels[1:-1], 4):
        got = sorted(c.zero_indices for c in components_at_level(tree, P, t))
        assert got == flood_partition(P, t, zeros, n=384)
