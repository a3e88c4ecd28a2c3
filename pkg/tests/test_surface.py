"""Core triangulation machinery: flips, laminations, isomorphisms."""

import pytest
from hypothesis import given, strategies as st

from veerstats.errors import FlipError, UnsupportedSurface
from veerstats.surface import (
    SurfaceSpec,
    Triangulation,
    check_lamination,
    corner_coordinates,
    edge_index,
    flip_weight,
    isomorphisms,
)
from veerstats.bases import build_base_triangulation


def torus():
    return Triangulation([(0, 1, ~2), (2, ~0, ~1)])


def test_surface_spec_rejects_non_hyperbolic():
    for g, n in [(0, 1), (0, 2), (1, 0)]:
        with pytest.raises(UnsupportedSurface):
            SurfaceSpec(g, n)
    assert SurfaceSpec(1, 1).euler_char == -1
    assert SurfaceSpec(0, 5).euler_char == -3
    assert str(SurfaceSpec(2, 3)) == "S_{2,3}"


@pytest.mark.parametrize(
    "g,n,triangles,edges,vertices",
    [(1, 1, 2, 3, 1), (0, 5, 6, 9, 5), (2, 3, 10, 15, 3)],
)
def test_base_triangulation_counts(g, n, triangles, edges, vertices):
    tri, punctures = build_base_triangulation(SurfaceSpec(g, n))
    assert tri.num_triangles == triangles
    assert tri.num_edges == edges
    assert tri.num_vertices == vertices
    assert len(punctures) == n


def test_flip_restores_square_with_reversed_diagonal():
    tri, _ = build_base_triangulation(SurfaceSpec(0, 5))
    for e in range(tri.num_edges):
        try:
            twice = tri.flip(e).flip(e)
        except FlipError:
            continue
        assert twice != tri  # the diagonal's direction is reversed...
        fix = [x if x != e else ~e for x in range(tri.num_edges)]
        assert twice.relabel(fix) == tri  # ...and only its direction


@pytest.mark.parametrize(
    "quad,e,expected",
    [((1, 1, 1, 1), 1, 1), ((2, 0, 2, 0), 2, 2), ((3, 1, 2, 2), 4, 1)],
)
def test_flip_weight_examples(quad, e, expected):
    assert flip_weight(quad, e) == expected


@given(st.lists(st.integers(0, 20), min_size=4, max_size=4),
       st.integers(0, 40))
def test_flip_weight_is_an_involution(quad, e):
    new = flip_weight(quad, e, tol=100)
    assert flip_weight(quad, new, tol=100) == e


def test_corner_coordinates_recover_weights():
    # on the torus, a (1,0) curve: weights w_k = n_k + n_{k+1} corner-wise
    tri = torus()
    w = [0, 1, 1]
    for t in tri.triangles:
        n = corner_coordinates(t, w)
        assert all(x >= 0 for x in n)
        for i in range(3):
            assert n[i] + n[(i + 1) % 3] == w[edge_index(t[i])]


def test_check_lamination():
    tri = torus()
    assert check_lamination(tri, [0, 1, 1])
    assert check_lamination(tri, [1, 1, 2])
    assert not check_lamination(tri, [1, 0, 0])   # violates triangle inequality
    assert not check_lamination(tri, [-1, 1, 1])


def test_lamination_preserved_by_flips():
    tri, _ = build_base_triangulation(SurfaceSpec(0, 5))
    from veerstats.bases import generator_library

    lib = generator_library(SurfaceSpec(0, 5))
    for _, _, bnd in lib.half_twists.values():
        assert check_lamination(tri, bnd)
        for e in range(tri.num_edges):
            try:
                quad = tri.flip_quad(e)
            except FlipError:
                continue
            w = list(bnd)
            w[e] = flip_weight(tuple(w[edge_index(x)] for x in quad), w[e])
            assert check_lamination(tri.flip(e), w)


def test_isomorphisms_include_identity_and_respect_relabels():
    tri, _ = build_base_triangulation(SurfaceSpec(1, 2))
    perms = list(isomorphisms(tri, tri))
    assert list(range(tri.num_edges)) in perms
    # a relabeled copy is isomorphic via the inverse relabel
    perm = [~1, 0, 3, 2, ~4, 5]
    moved = tri.relabel(perm)
    assert any(moved.relabel(p) == tri for p in isomorphisms(moved, tri))
