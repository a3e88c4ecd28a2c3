"""Maximal splitting sequences and periodicity detection."""

import pytest
from mpmath import mp

from veerstats.errors import DegenerateWeights
from veerstats.pa import invariant_lamination
from veerstats.splitting import (
    SplittingState,
    maximal_split_step,
    split_to_periodicity,
)
from veerstats.stratum import puncture_stratum
from veerstats.surface import SurfaceSpec, Triangulation, isomorphisms
from veerstats.words import WordCompiler, parse_word, puncture_permutation

PREC = 212


@pytest.fixture(scope="module")
def compilers():
    return {}


def pipeline(compilers, g, n, text, expect=False):
    spec = SurfaceSpec(g, n)
    if spec not in compilers:
        compilers[spec] = WordCompiler(spec)
    c = compilers[spec]
    word = parse_word(spec, text)
    r = invariant_lamination(c.compile(word))
    with mp.workprec(PREC):
        s = puncture_stratum(spec, c.base, r.stable_weights,
                             punctures=c.library.punctures)
    expect_vertices = None
    if expect:
        sigma, _ = puncture_permutation(word, c)
        inv = [0] * len(sigma)
        for i, j in enumerate(sigma):
            inv[j] = i
        vop = s.vertex_of_puncture
        expect_vertices = {vop[i]: vop[inv[i]] for i in range(len(sigma))}
    return split_to_periodicity(
        s.triangulation, s.weights, r.dilatation, PREC,
        expect_vertices=expect_vertices, cap=2000,
    )


def test_figure_eight_period_is_two_single_flips(compilers):
    ps = pipeline(compilers, 1, 1, "a0.b0!")
    assert ps.period == 2
    assert [len(st.flips) for st in ps.window[1:]] == [1, 1]
    assert ps.vertex_map == (0,)


def test_multiple_splits_happen_and_are_recorded(compilers):
    ps = pipeline(compilers, 1, 2, "(a0.b0!)^2.p0")
    sizes = [len(st.flips) for st in ps.window[1:]]
    assert any(k > 1 for k in sizes)  # genuine double splits in this window
    assert sum(sizes) >= ps.period


def test_total_weight_strictly_decreases(compilers):
    ps = pipeline(compilers, 0, 5, "q0.q1!.q2.q3!.q4")
    totals = [sum(st.weights) for st in ps.states]
    assert all(b < a for a, b in zip(totals, totals[1:]))
    assert all(min(st.weights) > 0 for st in ps.states)


def test_period_scales_weights_by_inverse_dilatation(compilers):
    ps = pipeline(compilers, 0, 5, "q0.q1!.q2.q3!.q4")
    first, last = ps.states[ps.start], ps.states[ps.start + ps.period]
    ratio = max(last.weights) / max(first.weights)
    assert abs(ratio * ps.dilatation - 1) < 1e-10


def test_puncture_constraint_still_finds_the_period(compilers):
    free = pipeline(compilers, 0, 5, "q0.q1!.q2.q3!.q4")
    pinned = pipeline(compilers, 0, 5, "q0.q1!.q2.q3!.q4", expect=True)
    assert (free.start, free.period) == (pinned.start, pinned.period)


def test_conjugate_words_share_the_periodic_triangulation(compilers):
    a = pipeline(compilers, 0, 5, "q0.q1!.q2.q3!.q4")
    b = pipeline(compilers, 0, 5, "q2.q0.q1!.q2.q3!.q4.q2!")
    assert a.period == b.period
    ta = a.states[a.start].triangulation
    tb = b.states[b.start].triangulation
    assert any(True for _ in isomorphisms(ta, tb))


def test_squared_word_doubles_the_period(compilers):
    a = pipeline(compilers, 0, 5, "q0.q1!.q2.q3!.q4")
    b = pipeline(compilers, 0, 5, "(q0.q1!.q2.q3!.q4)^2")
    assert b.period == 2 * a.period


def test_zero_weights_raise():
    tri = Triangulation([(0, 1, ~2), (2, ~0, ~1)])
    state = SplittingState(tri, (mp.mpf(0),) * 3, 0, (), (0,))
    with pytest.raises(DegenerateWeights):
        maximal_split_step(state, mp.mpf(2) ** -53)
