import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ising_rc.exact import exact_correlation
from ising_rc.lattice import (
    FREE, PERIODIC, LatticeError, Reflection, boundary_and_faces, build_box, build_rect,
    graph_from_json, reflect, reflected_images, remove_edges, remove_edges_by_coords,
)


def free_edge_count(radii):
    sides = [2 * n + 1 for n in radii]
    return sum(2 * n * math.prod(s for j, s in enumerate(sides) if j != a)
               for a, n in enumerate(radii))


def test_square_box_counts():
    g = build_box(2, (1, 1), FREE)
    assert (g.n_vertices, g.n_edges) == (9, 12)


def test_path_of_five():
    g = build_box(1, (2,), FREE)
    assert (g.n_vertices, g.n_edges) == (5, 4)
    assert g.vertices == [(-2,), (-1,), (0,), (1,), (2,)]


def test_periodic_cube_against_bruteforce_pairs():
    g = build_box(3, (1, 1, 1), PERIODIC)
    assert g.n_vertices == 27
    assert np.all(g.degree() == 6)
    # wrap-around neighbours by brute force over coordinate pairs
    pts = g.vertices
    brute = set()
    for p, q in itertools.combinations(pts, 2):
        diff = [(a - b) % 3 for a, b in zip(p, q)]
        if sorted(diff) in ([0, 0, 1], [0, 0, 2]):
            brute.add((g.index(p), g.index(q)))
    ours = {(int(u), int(v)) for u, v in g.edges}
    assert ours == {tuple(sorted(e)) for e in brute}
    assert g.n_edges == 81


def test_couplings_default_to_one():
    g = build_box(2, 2)
    assert np.all(g.couplings == 1.0)


@pytest.mark.parametrize("args", [(0, 1), (2, (-1, 1)), (2, (1, 1, 1)), (2, (1, 1), "plus"),
                                  (2, (0, 1), PERIODIC)])
def test_bad_boxes_rejected(args):
    with pytest.raises(LatticeError):
        build_box(*args)


def test_row_major_indexing():
    g = build_box(2, (1, 2))
    assert g.index((-1, -2)) == 0
    assert g.index((-1, -1)) == 1
    assert g.index((0, -2)) == 5
    for v in range(g.n_vertices):
        assert g.index(g.coord(v)) == v


@given(st.integers(1, 4).flatmap(lambda d: st.lists(st.integers(0, 3), min_size=d, max_size=d)))
def test_free_edge_formula(radii):
    d = len(radii)
    if math.prod(2 * n + 1 for n in radii) > 3000:
        radii = [min(n, 1) for n in radii]
    g = build_box(d, tuple(radii), FREE)
    assert g.n_vertices == math.prod(2 * n + 1 for n in radii)
    assert g.n_edges == free_edge_count(radii)
    E = {(int(u), int(v)) for u, v in g.edges}
    assert len(E) == g.n_edges


@given(st.integers(1, 3), st.integers(1, 2))
def test_periodic_degree(d, n):
    g = build_box(d, n, PERIODIC)
    assert np.all(g.degree() == 2 * d)


def test_even_periodic_ring_side_two_rejected():
    with pytest.raises(LatticeError):
        build_rect((2, 2), PERIODIC)


def test_remove_nothing():
    g = build_box(2, 1)
    assert remove_edges(g, []) is g


def test_remove_single_edge_decouples():
    g = build_rect((2,))
    h = remove_edges(g, [(0, 1)])
    assert h.n_vertices == 2 and h.n_edges == 0
    assert exact_correlation(h, 0.7, 0.0, [0, 1]) == 0.0


def test_remove_interior_edge_lowers_correlation():
    g = build_box(2, 1)
    x, y = g.index((-1, -1)), g.index((1, 1))
    before = exact_correlation(g, 0.4, 0.0, [x, y])
    h = remove_edges_by_coords(g, [((0, 0), (0, 1))])
    after = exact_correlation(h, 0.4, 0.0, [x, y])
    assert after < before


def test_remove_rejects_non_edges():
    g = build_box(2, 1)
    with pytest.raises(LatticeError):
        remove_edges(g, [(0, 4)])


@given(st.data())
def test_remove_idempotent_and_keeps_rest(data):
    g = build_box(2, (2, 1))
    E = [tuple(map(int, e)) for e in g.edges]
    A = data.draw(st.lists(st.sampled_from(E), unique=True))
    once = remove_edges(g, A)
    twice = remove_edges(once, A)
    assert once.n_vertices == g.n_vertices
    assert np.array_equal(once.edges, twice.edges)
    assert {tuple(map(int, e)) for e in once.edges} == set(E) - set(A)
    assert np.all(once.couplings == 1.0)


def test_json_roundtrip_keeps_removed_edges():
    g = remove_edges_by_coords(build_box(2, 2), [((0, 0), (1, 0)), ((-2, 2), (-1, 2))])
    h = graph_from_json(g.to_json())
    assert np.array_equal(g.edges, h.edges) and h.bc == g.bc


def test_reflect_examples():
    r = Reflection(0, 0)
    assert reflect((3, 1), r) == (-3, 1)
    assert reflect(((0, 0), (1, 0)), r) == ((0, 0), (-1, 0))


@given(st.sets(st.tuples(st.integers(-9, 9), st.integers(-9, 9)), max_size=12),
       st.integers(0, 1), st.integers(-4, 4))
def test_reflect_involution(points, axis, offset):
    r = Reflection(axis, offset)
    assert reflect(reflect(points, r), r) == points


def test_reflection_preserves_adjacency():
    g = build_box(2, 3)
    r = Reflection(1, 1)
    for u, v in g.edges:
        p, q = reflect((g.coord(int(u)), g.coord(int(v))), r)
        assert sum(abs(a - b) for a, b in zip(p, q)) == 1


def test_boundary_on_path():
    g = build_box(1, 5)
    bd, faces = boundary_and_faces(g, 2)
    assert bd == {(-2,), (2,)}
    assert len(faces) == 2


def test_boundary_square():
    g = build_box(2, 2)
    bd, faces = boundary_and_faces(g, 1)
    assert bd == {p for p in itertools.product((-1, 0, 1), repeat=2) if p != (0, 0)}
    assert len(faces) == 4
    assert set().union(*(f.vertices for f in faces)) == bd


@pytest.mark.parametrize("d", [1, 2, 3])
def test_faces_count_and_reflection_maps_outside(d):
    g = build_box(d, 3)
    bd, faces = boundary_and_faces(g, 1)
    assert len(faces) == 2 * d
    inner = build_box(d, 1)
    for f in faces:
        r = f.plane
        # face vertices are fixed by the reflection across their own plane
        assert all(r.point(p) == p for p in f.vertices)
        # the layer just inside the face is mapped just outside the box
        for p in f.vertices:
            q = list(p)
            q[f.axis] -= f.sign
            if inner.contains(q):
                assert not inner.contains(r.point(q))


def test_reflected_images_example():
    g = build_box(2, 2)
    assert set(reflected_images((0, 0), g, 1)) == {(2, 0), (-2, 0), (0, 2), (0, -2)}


def test_inner_box_must_fit():
    with pytest.raises(LatticeError):
        boundary_and_faces(build_box(2, 1), 2)
