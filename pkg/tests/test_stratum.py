"""Singularity detection and puncturing of the fiber."""

import pytest
from mpmath import mp

from veerstats.pa import invariant_lamination
from veerstats.surface import SurfaceSpec, corner_coordinates
from veerstats.stratum import puncture_stratum
from veerstats.words import WordCompiler, parse_word

S11 = SurfaceSpec(1, 1)
S12 = SurfaceSpec(1, 2)
S05 = SurfaceSpec(0, 5)


@pytest.fixture(scope="module")
def compilers():
    return {spec: WordCompiler(spec) for spec in (S11, S12, S05)}


def stratum(compilers, spec, text):
    c = compilers[spec]
    r = invariant_lamination(c.compile(parse_word(spec, text)))
    return puncture_stratum(spec, c.base, r.stable_weights)


def euler_poincare(spec, result):
    # sum of (1 - p/2) over singularities equals 2 - 2g on the closed surface
    total = sum(1 - mp.mpf(p) / 2 for p in result.prongs.values())
    assert total == 2 - 2 * spec.genus


def test_torus_word_has_regular_puncture(compilers):
    s = stratum(compilers, S11, "a0.b0!")
    assert s.surface == S11
    assert s.prongs == {0: 2}  # a regular point of the foliation
    assert s.added_vertices == ()
    assert s.triangulation is compilers[S11].base
    euler_poincare(S11, s)


def test_two_punctures_both_regular(compilers):
    for text in ["(a0.b0!)^2.p0", "(a0.b0!)^5.p0"]:
        s = stratum(compilers, S12, text)
        assert s.surface == S12
        assert s.prongs == {0: 2, 1: 2}
        assert s.added_vertices == ()
        euler_poincare(S12, s)


def test_sphere_word_gains_an_interior_three_prong_singularity(compilers):
    for text in ["q0.q1!.q2.q3!.q4", "q0.q1.q2.q3.q4.q0.q1!.q2.q3.q4!"]:
        s = stratum(compilers, S05, text)
        assert s.surface == SurfaceSpec(0, 6)
        assert len(s.added_vertices) == 1
        v = s.added_vertices[0]
        assert s.prongs[v] == 3
        for u in range(5):
            assert s.prongs[u] == 1  # one-prong at every original puncture
        euler_poincare(S05, s)


def test_transferred_weights_remain_a_lamination(compilers):
    s = stratum(compilers, S05, "q0.q1!.q2.q3!.q4")
    tri = s.triangulation
    assert len(s.weights) == tri.num_edges
    assert all(w > 0 for w in s.weights)
    for t in tri.triangles:
        n = corner_coordinates(t, s.weights)
        assert all(x > -1e-12 for x in n)


def test_prong_counts_are_dilatation_independent(compilers):
    # powers of a word share the stable lamination, hence the stratum
    a = stratum(compilers, S05, "q0.q1!.q2.q3!.q4")
    b = stratum(compilers, S05, "(q0.q1!.q2.q3!.q4)^2")
    assert a.prongs == b.prongs
    assert a.surface == b.surface
