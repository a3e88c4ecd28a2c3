"""Layered mapping-torus assembly, tautness, and veering colors."""

import json

import pytest

from conftest import build_veering, compiler_for
from veerstats.mtorus import _FACE, _SLOT_PAIR, _SLOT_VERTICES
from veerstats.words import parse_word, puncture_permutation

EXAMPLES = [
    (1, 1, "a0.b0!"),
    (1, 2, "(a0.b0!)^2.p0"),
    (0, 5, "q0.q1!.q2.q3!.q4"),
]


@pytest.fixture(params=EXAMPLES, ids=[w for _, _, w in EXAMPLES])
def tv(request):
    return build_veering(*request.param)[3]


def test_figure_eight_census_triangulation():
    tv = build_veering(1, 1, "a0.b0!")[3]
    assert tv.num_tetrahedra == 2
    assert tv.num_edges == 2
    assert tv.num_cusps == 1
    assert sorted(tv.edge_colors) == ["blue", "red"]
    assert all(tv.is_hinge(t) for t in range(2))


def test_edge_count_equals_tetrahedron_count(tv):
    assert tv.num_edges == tv.num_tetrahedra


def test_angle_sum_is_two_pi_around_every_edge(tv):
    # taut angles: pi on the two diagonal slots, 0 on the equatorial four
    for inc in tv.edge_incidences:
        pis = [slot for _, slot in inc if _SLOT_PAIR[slot] == 0]
        assert len(pis) == 2
        assert len(inc) >= 2


def test_face_gluings_are_involutive(tv):
    for t in tv.tetrahedra:
        assert len(t.gluings) == 4
        for face, (t2, f2, vmap) in enumerate(t.gluings):
            back = tv.tetrahedra[t2].gluings[f2]
            assert back[0] == t.index and back[1] == face
            assert dict(back[2]) == {v: k for k, v in vmap}
            # vertex maps carry the face across
            assert sorted(dict(vmap)[v] for v in _FACE[face]) \
                == sorted(_FACE[f2])


def test_coloring_satisfies_the_corner_condition(tv):
    # at every tet corner the two 0-angle edges have different colors
    for t in tv.tetrahedra:
        for v in range(4):
            zero_slots = [
                s for s in range(2, 6) if v in _SLOT_VERTICES[s]
            ]
            assert len(zero_slots) == 2
            c1, c2 = (tv.edge_colors[t.edge_classes[s]] for s in zero_slots)
            assert c1 != c2
    assert tv.edge_colors[0] == "red"


def test_hinge_counts_on_known_words():
    counts = {}
    for g, n, w in EXAMPLES:
        tv = build_veering(g, n, w)[3]
        counts[w] = (tv.num_tetrahedra,
                     sum(tv.is_hinge(t) for t in range(tv.num_tetrahedra)))
    assert counts["a0.b0!"] == (2, 2)
    assert counts["(a0.b0!)^2.p0"] == (11, 6)
    assert counts["q0.q1!.q2.q3!.q4"] == (14, 8)


def test_cusp_count_matches_the_puncture_action():
    for g, n, text in EXAMPLES:
        comp = compiler_for(g, n)
        _, strat, ps, tv = build_veering(g, n, text)
        sigma, _ = puncture_permutation(parse_word(comp.spec, text), comp)
        seen, cycles = set(), 0
        for i in range(len(sigma)):
            if i in seen:
                continue
            cycles += 1
            while i not in seen:
                seen.add(i)
                i = sigma[i]
        # added singular punctures are fixed by the monodromy here
        assert tv.num_cusps == cycles + len(strat.added_vertices)


def test_conjugate_words_build_the_same_statistics():
    a = build_veering(0, 5, "q0.q1!.q2.q3!.q4")[3]
    b = build_veering(0, 5, "q2.q0.q1!.q2.q3!.q4.q2!")[3]
    assert a.num_tetrahedra == b.num_tetrahedra
    assert a.num_cusps == b.num_cusps
    assert sorted(a.edge_colors) == sorted(b.edge_colors)
    assert sum(a.is_hinge(t) for t in range(a.num_tetrahedra)) \
        == sum(b.is_hinge(t) for t in range(b.num_tetrahedra))


def test_json_export_schema(tv):
    out = tv.to_json()
    assert json.loads(json.dumps(out)) == out
    assert set(out) >= {
        "tets", "edge_colors", "taut_angles", "total_order", "layers",
        "fiber", "monodromy", "num_cusps",
    }
    assert len(out["tets"]) == tv.num_tetrahedra
    for rec in out["tets"]:
        assert len(rec["gluings"]) == 4
        assert len(rec["edge_classes"]) == 6
    assert sorted(out["total_order"]) == list(range(tv.num_tetrahedra))


def test_total_order_is_layered_and_sorted_by_flipped_edge(tv):
    order = [tv.tetrahedra[i] for i in tv.total_order]
    for a, b in zip(order, order[1:]):
        assert (a.layer, a.flipped_edge) < (b.layer, b.flipped_edge)
