"""Gluing equations, shape solving, normalization, and volumes."""

import random

import pytest
from mpmath import mp

from conftest import build_veering, solve_veering
from veerstats.errors import DegenerateShape
from veerstats.geometry import (
    _PAIR_TRIPLE,
    V3,
    build_gluing_system,
    check_solution,
    normalize_shape,
    tet_volume,
)

REGULAR = mp.mpc(0.5, 3 ** 0.5 / 2)


def test_angle_parameter_triples_sum_to_the_identity():
    total = tuple(sum(t[i] for t in _PAIR_TRIPLE) for i in range(3))
    assert total == (0, 0, 1)
    # numerically: log z + log 1/(1-z) + log(1 - 1/z) = i*pi upstairs
    for z in [mp.mpc(0.3, 0.7), mp.mpc(0.5, 0.1), mp.mpc(-0.2, 1.3)]:
        s = mp.log(z) - mp.log(1 - z) + mp.log(1 - 1 / z)
        assert abs(s - 1j * mp.pi) < 1e-12


def test_figure_eight_system_dimensions():
    tv = build_veering(1, 1, "a0.b0!")[3]
    system = build_gluing_system(tv)
    assert system.num_tets == 2
    assert system.num_edge_equations == 2
    assert system.num_cusp_equations == 1


def test_edge_equation_count_equals_tet_count():
    for g, n, w in [(1, 2, "(a0.b0!)^2.p0"), (0, 5, "q0.q1!.q2.q3!.q4")]:
        _, system, _ = solve_veering(g, n, w)
        assert system.num_edge_equations == system.num_tets


def test_figure_eight_shapes_and_volume():
    _, _, sa = solve_veering(1, 1, "a0.b0!")
    assert sa.geometric and not sa.degenerate
    for z in sa.normalized_shapes:
        assert abs(z - mp.mpc("0.5", "0.86602540378443865")) < 1e-9
    assert abs(sa.volume - mp.mpf("2.029883212819307")) < 1e-9
    assert abs(sa.volume - 2 * V3) < 1e-9
    assert sa.residual < 1e-12


def test_known_words_solve_geometric_with_certified_residuals():
    for g, n, w in [(1, 2, "(a0.b0!)^2.p0"), (0, 5, "q0.q1!.q2.q3!.q4")]:
        tv, system, sa = solve_veering(g, n, w)
        assert sa.geometric
        assert sa.min_im > 0
        # independent recheck of the branch-free certificate
        with mp.workprec(sa.precision):
            assert check_solution(system, sa.shapes, 0) < mp.mpf(10) ** -10
        assert sa.volume > 0


def test_normalize_shape_examples():
    assert abs(normalize_shape(REGULAR) - REGULAR) < 1e-15
    assert abs(normalize_shape(mp.mpc(0, 1)) - mp.mpc(0.5, 0.5)) < 1e-15
    assert abs(normalize_shape(mp.mpc(2)) - mp.mpf(0.5)) < 1e-15
    with pytest.raises(DegenerateShape):
        normalize_shape(mp.mpc(0))
    with pytest.raises(DegenerateShape):
        normalize_shape(mp.mpc(1))


def test_normalize_shape_is_idempotent_and_lands_in_B():
    rng = random.Random(11)
    for _ in range(200):
        z = mp.mpc(rng.uniform(-2, 3), rng.uniform(-2, 2))
        if abs(z) < 1e-3 or abs(z - 1) < 1e-3:
            continue
        w = normalize_shape(z)
        assert abs(w) <= 1 + 1e-12 and abs(w - 1) <= 1 + 1e-12
        assert abs(normalize_shape(w) - w) < 1e-12
        # orbit membership
        orbit = [z, 1 / (1 - z), 1 - 1 / z]
        assert min(abs(w - x) for x in orbit) < 1e-9


def test_tet_volume_examples():
    assert abs(tet_volume(REGULAR) - V3) < 1e-12
    assert tet_volume(mp.mpc(0.37)) == 0
    assert tet_volume(mp.mpc(2.5)) == 0
    for z in [mp.mpc(0.3, 0.9), mp.mpc(0.8, 0.2), REGULAR]:
        assert abs(tet_volume(mp.conj(z)) + tet_volume(z)) < 1e-12
    with pytest.raises(DegenerateShape):
        tet_volume(mp.mpc(1))


def test_volume_is_maximized_only_at_the_regular_shape():
    rng = random.Random(7)
    for _ in range(2000):
        z = mp.mpc(rng.uniform(-1, 1), rng.uniform(-1, 1))
        if abs(z) > 1 or abs(z - 1) > 1 or abs(z) < 1e-6 or abs(z - 1) < 1e-6:
            continue
        v = tet_volume(z)
        assert abs(v) <= V3 + 1e-12
        if abs(z - REGULAR) > 0.05 and abs(z - mp.conj(REGULAR)) > 0.05:
            assert abs(v) < V3 - 1e-6


def test_volume_envelopes_bracket_samples():
    # for each Im(z) band, every sampled volume lies between the band's
    # empirical min and max over Re(z) -- the envelope curves are monotone
    # brackets of the scatter
    rng = random.Random(3)
    bands = {}
    pts = []
    for _ in range(4000):
        z = mp.mpc(rng.uniform(0, 1), rng.uniform(0.01, 0.9))
        if abs(z) > 1 or abs(z - 1) > 1:
            continue
        key = int(mp.im(z) * 10)
        v = tet_volume(z)
        pts.append((key, v))
        lo, hi = bands.get(key, (v, v))
        bands[key] = (min(lo, v), max(hi, v))
    for key, v in pts:
        lo, hi = bands[key]
        assert lo <= v <= hi
    # higher bands (closer to regular height) reach higher maxima
    maxima = [bands[k][1] for k in sorted(bands)]
    assert maxima[-2] > maxima[0]
