"""Word parsing and the compiled generator actions.

The relation tests compare compiled mapping classes by their piecewise-linear
action on a pool of test laminations (images of the library curves under
random short words), which is how equality is meaningfully tested here.
"""

import random

import pytest

from veerstats.errors import WordSyntaxError
from veerstats.surface import SurfaceSpec
from veerstats.words import (
    WordCompiler,
    compile_twist,
    parse_word,
    puncture_permutation,
)

S05 = SurfaceSpec(0, 5)
S11 = SurfaceSpec(1, 1)
S12 = SurfaceSpec(1, 2)


@pytest.fixture(scope="module")
def c05():
    return WordCompiler(S05)


@pytest.fixture(scope="module")
def c11():
    return WordCompiler(S11)


@pytest.fixture(scope="module")
def c12():
    return WordCompiler(S12)


def lamination_pool(compiler, count=30, seed=3):
    lib = compiler.library
    seeds = list(lib.twists.values())
    seeds += [b for _, _, b in lib.half_twists.values()]
    maps = [compiler.generator(n) for n in lib.names()]
    maps += [m.inverse() for m in maps]
    rnd = random.Random(seed)
    pool = [list(s) for s in seeds]
    for _ in range(count):
        w = list(rnd.choice(seeds))
        for _ in range(rnd.randint(1, 5)):
            w = rnd.choice(maps)(w)
        pool.append(w)
    return pool


def agree(f, g, pool):
    return all(f(list(w)) == g(list(w)) for w in pool)


# -- parsing ---------------------------------------------------------------


def test_parse_simple_word():
    w = parse_word(S05, "q0.q1!.q2^3")
    assert w.tokens == (("q0", 1), ("q1", -1), ("q2", 3))
    assert w.length == 5
    assert str(w) == "q0.q1!.q2^3"


def test_parse_group_expansion():
    w = parse_word(S12, "(a0.b0!)^3.p0")
    assert w.tokens == (("a0", 1), ("b0", -1)) * 3 + (("p0", 1),)
    w2 = parse_word(S12, "(a0.b0)!")
    assert w2.tokens == (("b0", -1), ("a0", -1))


def test_parse_errors():
    for bad in ["a0..b0", "(a0.b0", "a0^0", "A0", "a0)", "q-1"]:
        with pytest.raises(WordSyntaxError):
            parse_word(S05, bad)


def test_pure_word_rejects_half_twists(c12):
    w = parse_word(S12, "a0.q0", pure_only=True)
    with pytest.raises(WordSyntaxError):
        c12.compile(w)
    c12.compile(parse_word(S12, "a0.p0", pure_only=True))


# -- relations -------------------------------------------------------------


def test_torus_braid_relation(c11):
    a, b = c11.generator("a0"), c11.generator("b0")
    pool = lamination_pool(c11)
    assert agree(a * b * a, b * a * b, pool)
    assert not agree(a * b, b * a, pool)


def test_torus_twist_known_images(c11):
    a, b = c11.generator("a0"), c11.generator("b0")
    assert a([1, 0, 1]) == [1, 1, 2]
    assert a([0, 1, 1]) == [0, 1, 1]
    assert b([0, 1, 1]) == [1, 1, 0]


def test_inverse_and_power(c11):
    a = c11.generator("a0")
    pool = lamination_pool(c11)
    ident = lambda w: list(w)
    assert agree(a * a.inverse(), ident, pool)
    assert agree(a ** 3, a * a * a, pool)
    assert agree(a ** -2, (a * a).inverse(), pool)


def test_sphere_braid_and_commutation(c05):
    qs = [c05.generator("q%d" % i) for i in range(5)]
    pool = lamination_pool(c05)
    for i in range(5):
        j = (i + 1) % 5
        assert agree(qs[i] * qs[j] * qs[i], qs[j] * qs[i] * qs[j], pool)
    assert agree(qs[0] * qs[2], qs[2] * qs[0], pool)
    assert agree(qs[1] * qs[3], qs[3] * qs[1], pool)


def test_half_twist_squares_to_boundary_twist(c05):
    pool = lamination_pool(c05)
    for name, (arc, pair, bnd) in c05.library.half_twists.items():
        q = c05.generator(name)
        t_bnd = compile_twist(c05.base, bnd)
        assert agree(q * q, t_bnd, pool)
        assert q(list(bnd)) == list(bnd)


def test_punctured_torus_pair_relations(c12):
    a, b = c12.generator("a0"), c12.generator("b0")
    p, q = c12.generator("p0"), c12.generator("q0")
    pool = lamination_pool(c12)
    assert agree(a * b * a, b * a * b, pool)
    assert agree(p * b * p, b * p * b, pool)
    assert agree(a * p, p * a, pool)
    assert agree(a * q, q * a, pool)
    a0 = list(c12.library.twists["a0"])
    assert q(a0) == a0


# -- puncture permutations -------------------------------------------------


def test_puncture_permutations(c05):
    perm, part = puncture_permutation(parse_word(S05, "q0"), c05)
    assert perm == (1, 0, 2, 3, 4)
    assert part == (2, 1, 1, 1)
    perm, part = puncture_permutation(parse_word(S05, "q0.q1.q2.q3"), c05)
    assert part == (5,)
    perm, part = puncture_permutation(parse_word(S05, "q0.q0"), c05)
    assert perm == (0, 1, 2, 3, 4)


def test_twists_fix_punctures(c12):
    perm, part = puncture_permutation(parse_word(S12, "(a0.b0!)^2.p0"), c12)
    assert perm == (0, 1)
    perm, part = puncture_permutation(parse_word(S12, "a0.q0"), c12)
    assert perm == (1, 0)
