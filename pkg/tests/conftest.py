"""Shared pipeline helpers for the test suite.

Full builds (word -> lamination -> punctured fiber -> periodic splitting ->
colored triangulation) are expensive, so they are cached per word across
test modules.
"""

from mpmath import mp

from veerstats.geometry import build_gluing_system, solve_shapes
from veerstats.mtorus import assemble_mapping_torus, assign_veering_colors
from veerstats.pa import invariant_lamination
from veerstats.splitting import split_to_periodicity
from veerstats.stratum import puncture_stratum
from veerstats.surface import SurfaceSpec
from veerstats.words import WordCompiler, parse_word

PRECISION = 212

_compilers = {}
_builds = {}
_solves = {}


def compiler_for(g, n):
    spec = SurfaceSpec(g, n)
    if spec not in _compilers:
        _compilers[spec] = WordCompiler(spec)
    return _compilers[spec]


def build_veering(g, n, text, precision=PRECISION):
    """Returns (lamination result, stratum result, periodic splitting,
    colored veering triangulation) for the given word."""
    key = (g, n, text, precision)
    if key not in _builds:
        comp = compiler_for(g, n)
        word = parse_word(comp.spec, text)
        lam = invariant_lamination(comp.compile(word))
        with mp.workprec(precision):
            strat = puncture_stratum(
                comp.spec, comp.base, lam.stable_weights,
                punctures=comp.library.punctures,
            )
            ps = split_to_periodicity(
                strat.triangulation, strat.weights, lam.dilatation, precision
            )
        tv = assign_veering_colors(
            assemble_mapping_torus(ps, strat.surface, monodromy=text)
        )
        _builds[key] = (lam, strat, ps, tv)
    return _builds[key]


def solve_veering(g, n, text, precision=PRECISION):
    """Returns (veering triangulation, gluing system, shape assignment)."""
    key = (g, n, text, precision)
    if key not in _solves:
        tv = build_veering(g, n, text, precision)[3]
        system = build_gluing_system(tv)
        flags = [tv.is_hinge(t) for t in range(tv.num_tetrahedra)]
        _solves[key] = (tv, system,
                        solve_shapes(system, precision=precision,
                                     hinge_flags=flags))
    return _solves[key]
