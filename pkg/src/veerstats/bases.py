"""Deterministic base triangulations and generator curve libraries.

Construction version tag: ``base-v1``.  Serialized records reference the base
triangulation by this tag; changing any construction here requires bumping it.

Conventions
-----------
* ``S_{0,n}`` (n >= 4): the double of an n-gon with punctures P_0..P_{n-1} on
  the equator, both faces fan-triangulated from P_{n-1}.  Edges are the sides
  ``s_i`` (P_i -> P_{i+1}, labels ``0..n-1``), then the front fan diagonals
  (P_{n-1} -> P_i for i = 1..n-3), then the back fan diagonals.
* ``S_{g,1}`` (g >= 1): the 4g-gon with side word a0 b0 a0' b0' ... fan
  triangulated from the first polygon corner.  Labels: ``2k`` is the a_k side
  pair, ``2k+1`` the b_k pair, then fan diagonals.
* ``S_{g,n}`` (n >= 2): built from ``S_{g,n-1}`` by coning the lowest-indexed
  triangle with a corner at the last puncture, so consecutive punctures are
  always joined by an edge (which the half-twist compiler relies on).

Generator curves are stored as edge-weight vectors; half-twist generators are
stored as the edge joining the two punctures they transpose.  Curve libraries
are provided for genus 0 (all n) and genus 1 with n <= 2; other surfaces
raise :class:`UnsupportedSurface` from :func:`generator_set` (the base
triangulation itself exists for every hyperbolic type).
"""

from __future__ import annotations

from .errors import UnsupportedSurface
from .surface import SurfaceSpec, Triangulation, corner_coordinates

BASE_VERSION = "base-v1"


def _sphere_base(n):
    """Doubled fan-triangulated n-gon; returns (triangulation, corner of each
    puncture)."""
    # signed directed arcs from the apex P_{n-1} to P_i, front and back.
    s = list(range(n))
    d = [None] + [n + i - 1 for i in range(1, n - 2)]            # d[1..n-3]
    e = [None] + [n + (n - 3) + i - 1 for i in range(1, n - 2)]  # e[1..n-3]

    def D(i):  # front apex arc P_{n-1} -> P_i as a signed label
        if i == 0:
            return s[n - 1]
        if i == n - 2:
            return ~s[n - 2]
        return d[i]

    def E(i):  # back apex arc P_{n-1} -> P_i
        if i == 0:
            return s[n - 1]
        if i == n - 2:
            return ~s[n - 2]
        return e[i]

    front = [(D(i), s[i], ~D(i + 1)) for i in range(n - 2)]
    back = [(E(i + 1), ~s[i], ~E(i)) for i in range(n - 2)]
    tri = Triangulation(front + back)
    # P_i is the start of side s_i; the positive side of s_i sits in front
    # triangle F_i at slot 1 for i <= n-3.
    corners = []
    for i in range(n - 2):
        corners.append((i, 1))
    corners.append((n - 3, 2))   # P_{n-2} = start of s_{n-2} in F_{n-3}
    corners.append((0, 0))       # apex P_{n-1}
    return tri, corners


def _polygon_base(g):
    """Fan-triangulated 4g-gon for S_{g,1}."""
    N = 4 * g

    def side(j):  # directed boundary side j as a signed label
        k, r = divmod(j, 4)
        return [2 * k, 2 * k + 1, ~(2 * k), ~(2 * k + 1)][r]

    def G(j):  # directed arc V_0 -> V_j
        if j == 1:
            return side(0)
        if j == N - 1:
            return ~side(N - 1)
        return 2 * g + (j - 2)

    tris = [(G(j), side(j), ~G(j + 1)) for j in range(1, N - 1)]
    tri = Triangulation(tris)
    return tri, [(0, 0)]


def cone_triangle(tri, t, weight_vectors=()):
    """Subdivide triangle ``t`` by coning from a new interior puncture.

    Adds three spoke edges g_0, g_1, g_2 (new labels, directed from the new
    puncture to corners 0, 1, 2 of ``t``).  Any weight vectors passed along
    are transferred: the spoke to corner ``i`` picks up that corner's
    coordinate (leaves cutting corner ``i`` must cross it).

    Returns ``(new_triangulation, new_weight_vectors, corner_of_new_vertex)``.
    """
    x, y, z = tri.triangles[t]
    E = tri.num_edges
    g0, g1, g2 = E, E + 1, E + 2
    tris = list(tri.triangles)
    tris[t] = (x, ~g1, g0)
    tris.append((y, ~g2, g1))
    tris.append((z, ~g0, g2))
    new_tri = Triangulation(tris)
    out = []
    for w in weight_vectors:
        n0, n1, n2 = corner_coordinates((x, y, z), w)
        out.append(tuple(w) + (n0, n1, n2))
    # the new vertex is the start of ~g1's... spoke g0 runs new->corner0, so
    # the new vertex is the start of g0; g0 sits at slot 2 of triangle t.
    return new_tri, out, (t, 2)


def _torus_chain_base(g, n):
    """S_{g,n} for g >= 1: polygon base plus n-1 conings; also transfers the
    genus-1 curve vectors so the library below can use them."""
    tri, corners = _polygon_base(g)
    vectors = []
    if g == 1:
        vectors = [(0, 1, 1), (1, 0, 1)]  # a_0, b_0 on the fan-triangulated square
    for _ in range(n - 1):
        # cone the lowest-indexed triangle with a corner at the last puncture
        last = tri.corner_vertex(*corners[-1])
        t = min(
            t
            for t in range(tri.num_triangles)
            for i in range(3)
            if tri.corner_vertex(t, i) == last
        )
        nt = tri.num_triangles
        tri, vectors, corner = cone_triangle(tri, t, vectors)
        # coning moves corners 1 and 2 of triangle t into the appended
        # triangles; keep the stored puncture corners pointing at the same
        # vertices.
        remap = {(t, 1): (nt, 0), (t, 2): (nt + 1, 0)}
        corners = [remap.get(c, c) for c in corners]
        corners.append(corner)
    return tri, corners, vectors


def build_base_triangulation(spec: SurfaceSpec):
    """The fixed deterministic triangulation for a surface.

    Returns ``(triangulation, punctures)`` where ``punctures[i]`` is the
    vertex id of puncture ``P_i``.
    """
    g, n = spec.genus, spec.punctures
    if g == 0:
        tri, corners = _sphere_base(n)
    else:
        tri, corners, _ = _torus_chain_base(g, n)
    punctures = [tri.corner_vertex(*c) for c in corners]
    assert len(set(punctures)) == n, "puncture corners collapsed"
    assert tri.num_vertices == n
    assert tri.num_triangles == 2 * abs(spec.euler_char)
    assert tri.num_edges == 3 * abs(spec.euler_char)
    return tri, punctures


def _pair_boundary(tri, punctures, i, j, arc):
    """Weight vector of the boundary of a neighborhood of ``arc`` joining
    punctures i and j: one crossing per edge-end at either puncture."""
    pair = {punctures[i], punctures[j]}
    out = []
    for e in range(tri.num_edges):
        if e == arc:
            out.append(0)
        else:
            u, v = tri.edge_vertices(e)
            out.append((u in pair) + (v in pair))
    return tuple(out)


class GeneratorLibrary:
    """Named generator curves/arcs for one surface.

    ``twists``: name -> weight vector of the twisting curve.
    ``half_twists``: name -> (edge joining the punctures, (i, j) transposed,
    boundary-curve weight vector, used by the q^2 = T_boundary check).
    """

    def __init__(self, spec, tri, punctures, twists, half_twists,
                 half_fixed=None):
        self.spec = spec
        self.triangulation = tri
        self.punctures = punctures
        self.twists = dict(twists)
        self.half_twists = dict(half_twists)
        # known curves disjoint from each half-twist's disc; the compiler
        # requires candidates to fix them (rules out compositions with
        # mapping classes supported elsewhere).
        self.half_fixed = dict(half_fixed or {})

    def names(self, pure_only=False):
        out = list(self.twists)
        if not pure_only:
            out += list(self.half_twists)
        return out


def _edge_between(tri, punctures, i, j):
    pi, pj = punctures[i], punctures[j]
    for e in range(tri.num_edges):
        u, v = tri.edge_vertices(e)
        if {u, v} == {pi, pj}:
            return e
    raise AssertionError("no edge between punctures %d and %d" % (i, j))


def generator_library(spec: SurfaceSpec) -> GeneratorLibrary:
    g, n = spec.genus, spec.punctures
    tri, punctures = build_base_triangulation(spec)
    if g == 0:
        half = {}
        for i in range(n):
            j = (i + 1) % n
            arc = _edge_between(tri, punctures, i, j)
            half["q%d" % i] = (arc, (i, j), _pair_boundary(tri, punctures, i, j, arc))
        return GeneratorLibrary(spec, tri, punctures, {}, half)
    if g == 1 and n == 1:
        return GeneratorLibrary(
            spec, tri, punctures, {"a0": (0, 1, 1), "b0": (1, 0, 1)}, {}
        )
    if g == 1 and n == 2:
        _, _, vectors = _torus_chain_base(1, 2)
        a0, b0 = vectors
        # p_0: parallel to a_0 on the other side of P_1 (the horizontal curve
        # passing between the puncture line and P_1); crosses b_0's edge, the
        # square diagonal and the first two spokes.
        p0 = (0, 1, 1, 1, 1, 0)
        arc = _edge_between(tri, punctures, 0, 1)
        half = {"q0": (arc, (0, 1), _pair_boundary(tri, punctures, 0, 1, arc))}
        return GeneratorLibrary(
            spec, tri, punctures, {"a0": a0, "b0": b0, "p0": p0}, half,
            half_fixed={"q0": [a0]},
        )
    raise UnsupportedSurface(
        "no generator library for %s (supported: genus 0, and genus 1 with "
        "n <= 2)" % spec
    )


def generator_set(spec: SurfaceSpec, pure_only=False):
    """Names and curve descriptors of the generators for a surface.

    Returns a list of ``(name, descriptor)`` where the descriptor is a weight
    vector for Dehn twists and ``('arc', edge)`` for half-twists.
    """
    lib = generator_library(spec)
    out = [(name, lib.twists[name]) for name in lib.twists]
    if not pure_only:
        out += [(name, ("arc", lib.half_twists[name][0]))
                for name in lib.half_twists]
    return out
