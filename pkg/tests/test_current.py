import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ising_rc.current import (
    Backbone, BudgetExceeded, CurrentConfiguration, EdgeOrder, InconsistentBackbone,
    all_odd_paths, cancelled_edges, concat, connected, enumerate_backbones, enumerate_currents,
    extract_backbone, is_consistent, path_sort_key, sources, weight,
)
from ising_rc.lattice import build_box, build_rect, remove_edges_by_coords

EDGE = build_rect((2,))
SQUARE = build_rect((2, 2))  # vertices 0=(0,0) 1=(0,1) 2=(1,0) 3=(1,1)
SMALL = {
    "path4": build_rect((4,)),
    "square": SQUARE,
    "rect2x3": build_rect((2, 3)),
    "box3x3-cut": remove_edges_by_coords(build_box(2, 1), [((0, 0), (0, 1))]),
}


def current(g, vals):
    return CurrentConfiguration(g, np.asarray(vals))


def test_sources_examples():
    assert sources(CurrentConfiguration.zero(SQUARE)) == set()
    assert sources(current(EDGE, [3])) == {0, 1}
    assert sources(current(SQUARE, [1, 1, 1, 1])) == set()


@given(st.lists(st.integers(0, 5), min_size=7, max_size=7))
def test_sources_even_cardinality(vals):
    assert len(sources(current(SMALL["rect2x3"], vals))) % 2 == 0


def test_negative_current_rejected():
    with pytest.raises(ValueError):
        current(EDGE, [-1])


def test_weight_examples():
    assert weight(CurrentConfiguration.zero(SQUARE), 0.9) == 1.0
    assert weight(current(EDGE, [2]), 0.5) == pytest.approx(0.125, abs=1e-15)
    g = build_rect((4,))
    assert weight(current(g, [1, 0, 3]), 0.4) == pytest.approx(0.4 * 0.4**3 / 6, rel=1e-14)


def test_connected_examples():
    zero = CurrentConfiguration.zero(SQUARE)
    assert connected(zero, 2, 2)
    assert not connected(zero, 0, 3)
    side = CurrentConfiguration.from_mapping(SQUARE, {(0, 1): 2, (1, 3): 1})
    assert connected(side, 0, 3)
    assert connected(side, 0, 1)
    assert not connected(side, 0, 2)


def test_connected_restricted_to_subgraph():
    n = CurrentConfiguration.from_mapping(SQUARE, {(0, 1): 1, (1, 3): 1})
    sub = remove_edges_by_coords(SQUARE, [((0, 0), (0, 1))])
    assert connected(n, 0, 3)
    assert not connected(n, 0, 3, sub)


def test_default_order_directions():
    g = build_box(2, 1)
    order = EdgeOrder.default(g)
    c = g.index((0, 0))
    up0, down0 = g.index((1, 0)), g.index((-1, 0))
    up1, down1 = g.index((0, 1)), g.index((0, -1))
    keys = [order.key(c, w) for w in (up0, down0, up1, down1)]
    assert keys == sorted(keys)


def test_cancelled_edges_examples():
    g = build_box(2, 1)
    order = EdgeOrder.default(g)
    c = g.index((0, 0))
    assert cancelled_edges(g, [], order) == set()
    first = min(g.neighbors(c), key=lambda w: order.key(c, w))
    last = max(g.neighbors(c), key=lambda w: order.key(c, w))
    assert cancelled_edges(g, [(c, first)], order) == {tuple(sorted((c, first)))}
    assert len(cancelled_edges(g, [(c, last)], order)) == 4


def test_consistency_examples():
    g = SQUARE
    order = EdgeOrder.default(g)
    assert is_consistent(g, [], order)
    assert is_consistent(g, [(0, 1)], order)
    assert not is_consistent(g, [(0, 1), (1, 0)], order)


def brute_consistent(g, steps, order):
    """Independent restatement: step k's edge is not among edges cancelled at earlier steps."""
    for k, (a, b) in enumerate(steps):
        e = frozenset((a, b))
        for x, y in steps[:k]:
            if e == frozenset((x, y)):
                return False
            for z in g.neighbors(x):
                if order.key(x, z) < order.key(x, y) and e == frozenset((x, z)):
                    return False
    return True


def random_walk(g, rng, length):
    v = int(rng.integers(g.n_vertices))
    steps = []
    for _ in range(length):
        w = int(rng.choice(g.neighbors(v)))
        steps.append((v, w))
        v = w
    return steps


@pytest.mark.parametrize("seed", range(5))
def test_consistency_matches_reimplementation(seed):
    rng = np.random.default_rng(seed)
    g = build_box(2, 1)
    for order in (EdgeOrder.default(g), EdgeOrder.random(g, seed)):
        for _ in range(80):
            steps = random_walk(g, rng, int(rng.integers(1, 7)))
            ok = is_consistent(g, steps, order)
            assert ok == brute_consistent(g, steps, order)
            if ok:
                # prefix closed, and cancellation grows with the prefix
                for k in range(len(steps)):
                    assert is_consistent(g, steps[:k], order)
                    assert cancelled_edges(g, steps[:k], order) <= cancelled_edges(g, steps[:k + 1], order)


def test_extract_simple_path():
    g = build_rect((4,))
    b = extract_backbone(current(g, [1, 3, 1]), EdgeOrder.default(g))
    assert b.steps == ((0, 1), (1, 2), (2, 3))
    b = extract_backbone(current(EDGE, [1]), EdgeOrder.default(EDGE))
    assert b.steps == ((0, 1),)


def random_two_source_current(g, rng):
    while True:
        vals = rng.integers(0, 4, g.n_edges)
        src = sources(current(g, vals))
        if len(src) == 2:
            return current(g, vals)


@pytest.mark.parametrize("name", sorted(SMALL))
def test_backbone_minimality(name):
    g = SMALL[name]
    rng = np.random.default_rng(len(name))
    for order in (EdgeOrder.default(g), EdgeOrder.reversed_directions(g), EdgeOrder.random(g, 3)):
        for _ in range(42):
            n = random_two_source_current(g, rng)
            b = extract_backbone(n, order)
            x, y = sorted(sources(n))
            paths = all_odd_paths(g, n.odd_edges(), x, y)
            best = min(paths, key=lambda p: path_sort_key(p, order))
            assert b.steps == best
            assert is_consistent(g, b.steps, order)
            assert set(b.edges) <= n.odd_edges()
            assert set(b.edges) <= b.cancelled


def test_extract_needs_two_sources():
    with pytest.raises(ValueError):
        extract_backbone(current(SQUARE, [1, 1, 1, 1]), EdgeOrder.default(SQUARE))


def test_enumerate_backbones_counts():
    assert len(enumerate_backbones(EDGE, 0, 1, EdgeOrder.default(EDGE))) == 1
    g = build_rect((3,))
    assert len(enumerate_backbones(g, 0, 2, EdgeOrder.default(g))) == 1


@pytest.mark.parametrize("name", sorted(SMALL))
def test_enumerate_backbones_against_path_filter(name):
    g = SMALL[name]
    E = {tuple(map(int, e)) for e in g.edges}
    for order in (EdgeOrder.default(g), EdgeOrder.random(g, 7)):
        for x, y in [(0, 1), (0, g.n_vertices - 1)]:
            got = {b.steps for b in enumerate_backbones(g, x, y, order)}
            brute = {p for p in all_odd_paths(g, E, x, y)
                     if is_consistent(g, p, order) and y not in [a for a, _ in p]}
            assert got == brute
            assert len(got) == len(enumerate_backbones(g, x, y, order))


def test_square_adjacent_pair_backbones():
    order = EdgeOrder.default(SQUARE)
    bbs = enumerate_backbones(SQUARE, 0, 1, order)
    simple = [((0, 1),), ((0, 2), (2, 3), (3, 1))]
    assert {b.steps for b in bbs} == {p for p in simple if is_consistent(SQUARE, p, order)}


def test_backbone_budget():
    with pytest.raises(BudgetExceeded):
        enumerate_backbones(build_box(2, 2), 0, 1, EdgeOrder.default(build_box(2, 2)))


def test_from_steps_rejects_bad_paths():
    order = EdgeOrder.default(SQUARE)
    with pytest.raises(InconsistentBackbone):
        Backbone.from_steps(SQUARE, [(0, 1), (1, 0)], order)
    with pytest.raises(InconsistentBackbone):
        Backbone.from_steps(SQUARE, [(0, 1), (2, 3)], order)
    with pytest.raises(InconsistentBackbone):
        Backbone.from_steps(SQUARE, [(0, 3)], order)


def test_concat_and_split_roundtrip():
    g = SMALL["rect2x3"]
    order = EdgeOrder.default(g)
    for b in enumerate_backbones(g, 0, 5, order):
        for k in range(len(b) + 1):
            w1, w2 = b.split(k, g, order)
            assert concat(g, w1, w2, order) == b


def test_empty_backbone_is_identity():
    order = EdgeOrder.default(SQUARE)
    w = Backbone.from_steps(SQUARE, [(0, 1)], order)
    e = Backbone.from_steps(SQUARE, [], order, start=1)
    assert concat(SQUARE, w, e, order) == w
    assert e.sources == frozenset()


def test_enumerate_currents_examples():
    assert sorted(int(n.values[0]) for n in enumerate_currents(EDGE, 2, set())) == [0, 2]
    assert sorted(int(n.values[0]) for n in enumerate_currents(EDGE, 3, {0, 1})) == [1, 3]
    got = sorted(tuple(n.values) for n in enumerate_currents(SQUARE, 1, set()))
    assert got == [(0, 0, 0, 0), (1, 1, 1, 1)]


@given(st.integers(0, 3), st.sampled_from([(), (0, 1), (0, 3), (0, 1, 2, 3)]))
def test_enumerate_currents_complete(cap, A):
    got = [tuple(n.values) for n in enumerate_currents(SQUARE, cap, set(A))]
    assert len(got) == len(set(got))
    want = 0
    for vals in np.ndindex(*(cap + 1,) * 4):
        if sources(current(SQUARE, vals)) == set(A):
            want += 1
    assert len(got) == want
    assert all(sources(current(SQUARE, v)) == set(A) for v in got)


def test_enumeration_budget():
    with pytest.raises(BudgetExceeded):
        list(enumerate_currents(build_box(2, 2), 6, set()))


def test_json_forms():
    g = SQUARE
    order = EdgeOrder.default(g)
    b = enumerate_backbones(g, 0, 3, order)[0]
    d = json.loads(b.to_json())
    assert Backbone.from_steps(g, d["steps"], order, start=d["start"]) == b
    assert json.loads(current(g, [0, 1, 0, 3]).to_json()) == {"1": 1, "3": 3}
