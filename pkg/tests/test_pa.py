"""Stable laminations and dilatations."""

import random

import numpy as np
import pytest
from mpmath import mp

from veerstats.errors import NotPseudoAnosov
from veerstats.pa import invariant_lamination
from veerstats.surface import SurfaceSpec, corner_coordinates
from veerstats.words import WordCompiler, parse_word

S11 = SurfaceSpec(1, 1)
S12 = SurfaceSpec(1, 2)
S05 = SurfaceSpec(0, 5)


@pytest.fixture(scope="module")
def c11():
    return WordCompiler(S11)


@pytest.fixture(scope="module")
def c12():
    return WordCompiler(S12)


@pytest.fixture(scope="module")
def c05():
    return WordCompiler(S05)


def lam(compiler, text):
    return invariant_lamination(
        compiler.compile(parse_word(compiler.spec, text))
    )


def test_torus_dilatation_matches_linear_algebra_oracle(c11):
    # a0.b0! acts on torus homology as [[2,1],[1,1]]; its spectral radius is
    # an independent oracle for the dilatation.
    oracle = max(abs(np.linalg.eigvals(np.array([[2.0, 1.0], [1.0, 1.0]]))))
    r = lam(c11, "a0.b0!")
    assert abs(float(r.dilatation) - oracle) < 1e-8
    assert abs(float(r.dilatation) - (3 + 5 ** 0.5) / 2) < 1e-8
    assert float(r.log_dilatation) == pytest.approx(
        float(mp.log(r.dilatation))
    )


def test_stable_weights_invariants(c11):
    r = lam(c11, "a0.b0!")
    assert max(r.stable_weights) == 1
    tri = c11.base
    for t in tri.triangles:
        n = corner_coordinates(t, r.stable_weights)
        assert all(x > -1e-30 for x in n)
        assert max(n) > 0  # filling: no triangle fully degenerate
    # eigen-residual within tolerance
    image = c11.compile(parse_word(S11, "a0.b0!"))(list(r.stable_weights))
    tol = mp.mpf(2) ** (-r.precision // 2)
    residual = max(abs(a - r.dilatation * b)
                   for a, b in zip(image, r.stable_weights))
    assert residual < 10 * tol


def test_identity_is_periodic(c11):
    with pytest.raises(NotPseudoAnosov) as exc:
        lam(c11, "")
    assert exc.value.kind == "Periodic"


def test_finite_order_word_is_periodic(c11):
    with pytest.raises(NotPseudoAnosov) as exc:
        lam(c11, "a0.b0")  # order six up to the center
    assert exc.value.kind == "Periodic"


def test_single_twist_is_reducible(c11):
    for text in ["a0", "b0!", "a0^3"]:
        with pytest.raises(NotPseudoAnosov) as exc:
            lam(c11, text)
        assert exc.value.kind == "Reducible"


def test_boundary_twist_power_is_reducible(c12):
    with pytest.raises(NotPseudoAnosov) as exc:
        lam(c12, "q0.q0")
    assert exc.value.kind == "Reducible"


def test_conjugation_invariance_of_dilatation(c12):
    base = "(a0.b0!)^2.p0"
    r0 = lam(c12, base)
    rnd = random.Random(11)
    names = c12.library.names()
    for _ in range(5):
        w = ".".join(
            n + ("!" if rnd.random() < 0.5 else "")
            for n in rnd.choices(names, k=rnd.randint(1, 3))
        )
        conj = "%s.%s.(%s)!" % (w, base, w)
        r1 = lam(c12, conj)
        assert abs(float(r1.dilatation) / float(r0.dilatation) - 1) < 1e-8


def test_inverse_symmetry_of_dilatation(c05):
    word = "q0.q1!.q2.q3!.q4"
    r = lam(c05, word)
    ri = lam(c05, "(%s)!" % word)
    assert abs(float(ri.dilatation) / float(r.dilatation) - 1) < 1e-8
