"""Combinatorial surfaces: ideal triangulations, flips and measured laminations.

An oriented ideal triangulation is stored as a list of triangles, each a triple
of *signed edge labels*.  Edge ``e`` (a nonnegative integer) traversed in its
intrinsic direction is written ``e``; traversed backwards it is written ``~e``
(bitwise complement, so labels are plain ints).  Every signed label appears in
exactly one triangle slot, and each triangle lists its boundary edges in
counterclockwise order.  This is enough to recover gluings, vertices and
orientation; it is the same data as a gluing table but easier to relabel.

Corner ``i`` of a triangle is the vertex at the start of the edge in slot ``i``
(equivalently the end of the edge in slot ``i-1``).

A measured lamination carried by the dual train track is a vector of
nonnegative transverse measures indexed by edges.  The corner coordinate at
corner ``i`` is ``(w[i] + w[i-1] - w[i+1]) / 2`` (indices mod 3, weights read
off the triangle's slots); nonnegativity of all corner coordinates is the
switch condition in edge coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import FlipError, NegativeResult, UnsupportedSurface


def edge_index(label):
    """Underlying (unsigned) edge of a signed label."""
    return label if label >= 0 else ~label


@dataclass(frozen=True)
class SurfaceSpec:
    """A punctured surface of finite type, genus ``g`` with ``n >= 1``
    punctures, required to be hyperbolic (negative Euler characteristic)."""

    genus: int
    punctures: int

    def __post_init__(self):
        if self.genus < 0 or self.punctures < 1:
            raise UnsupportedSurface(
                "need genus >= 0 and at least one puncture, got (%d, %d)"
                % (self.genus, self.punctures)
            )
        if self.euler_char >= 0:
            raise UnsupportedSurface(
                "S_{%d,%d} is not hyperbolic" % (self.genus, self.punctures)
            )

    @property
    def euler_char(self):
        return 2 - 2 * self.genus - self.punctures

    @property
    def complexity(self):
        return 3 * self.genus - 3 + self.punctures

    def __str__(self):
        return "S_{%d,%d}" % (self.genus, self.punctures)


class Triangulation:
    """Oriented ideal triangulation given by triangles of signed edge labels.

    Immutable; ``flip`` and ``relabel`` return new instances.
    """

    __slots__ = ("triangles", "num_edges", "_side", "_corner_vertex", "_num_vertices")

    def __init__(self, triangles):
        self.triangles = tuple(tuple(t) for t in triangles)
        side = {}
        for t, tri in enumerate(self.triangles):
            if len(tri) != 3:
                raise ValueError("triangle %d does not have 3 sides" % t)
            for i, lab in enumerate(tri):
                if lab in side:
                    raise ValueError("signed label %d appears twice" % lab)
                side[lab] = (t, i)
        num_edges = (3 * len(self.triangles)) // 2
        for e in range(num_edges):
            if e not in side or ~e not in side:
                raise ValueError("edge %d does not have both sides present" % e)
        self.num_edges = num_edges
        self._side = side
        self._corner_vertex = None
        self._num_vertices = None

    # -- basic queries ----------------------------------------------------

    def side(self, label):
        """(triangle index, slot) holding this signed label."""
        return self._side[label]

    def triangle_of(self, label):
        return self._side[label][0]

    def _compute_vertices(self):
        corner_vertex = {}
        nv = 0
        for t in range(len(self.triangles)):
            for i in range(3):
                if (t, i) in corner_vertex:
                    continue
                # walk around the vertex: from corner (t, i), cross the edge
                # starting here to the next corner counterclockwise.
                cur = (t, i)
                while cur not in corner_vertex:
                    corner_vertex[cur] = nv
                    ct, ci = cur
                    lab = self.triangles[ct][ci]
                    nt, ni = self._side[~lab]
                    cur = (nt, (ni + 1) % 3)
                assert corner_vertex[cur] == nv
                nv += 1
        self._corner_vertex = corner_vertex
        self._num_vertices = nv

    def corner_vertex(self, t, i):
        """Vertex (puncture orbit) id at corner ``i`` of triangle ``t``."""
        if self._corner_vertex is None:
            self._compute_vertices()
        return self._corner_vertex[(t, i)]

    @property
    def num_vertices(self):
        if self._num_vertices is None:
            self._compute_vertices()
        return self._num_vertices

    @property
    def num_triangles(self):
        return len(self.triangles)

    def edge_vertices(self, e):
        """(start vertex, end vertex) of edge ``e`` in its intrinsic
        direction."""
        t, i = self._side[e]
        return self.corner_vertex(t, i), self.corner_vertex(t, (i + 1) % 3)

    def edge_degrees(self):
        """For each edge, the number of triangle-corner incidences of its two
        endpoint vertices; used as a cheap combinatorial signature."""
        deg = [0] * self.num_vertices
        for t in range(len(self.triangles)):
            for i in range(3):
                deg[self.corner_vertex(t, i)] += 1
        out = []
        for e in range(self.num_edges):
            a, b = self.edge_vertices(e)
            out.append((deg[a], deg[b]) if deg[a] <= deg[b] else (deg[b], deg[a]))
        return out

    def vertex_degree(self, v):
        if self._corner_vertex is None:
            self._compute_vertices()
        return sum(1 for w in self._corner_vertex.values() if w == v)

    def vertex_corners(self, v):
        """Corners at vertex ``v`` in counterclockwise cyclic order."""
        if self._corner_vertex is None:
            self._compute_vertices()
        start = min(c for c, w in self._corner_vertex.items() if w == v)
        out = []
        cur = start
        while True:
            out.append(cur)
            ct, ci = cur
            lab = self.triangles[ct][ci]
            nt, ni = self._side[~lab]
            cur = (nt, (ni + 1) % 3)
            if cur == start:
                return out

    # -- canonical form and equality --------------------------------------

    def canonical(self):
        tris = []
        for tri in self.triangles:
            k = min(range(3), key=lambda i: tri[i])
            tris.append((tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]))
        return tuple(sorted(tris))

    def __eq__(self, other):
        return isinstance(other, Triangulation) and self.canonical() == other.canonical()

    def __hash__(self):
        return hash(self.canonical())

    # -- moves -------------------------------------------------------------

    def flip_quad(self, e):
        """The square around edge ``e``: signed side labels ``(a, b, c, d)``
        in cyclic boundary order, where ``e`` runs from the corner between
        ``b`` and ``c`` to the corner between ``d`` and ``a``.  ``a`` and
        ``c`` are opposite sides, as are ``b`` and ``d``."""
        t1, i1 = self._side[e]
        t2, i2 = self._side[~e]
        if t1 == t2:
            raise FlipError("edge %d has both sides on one triangle" % e)
        tri1, tri2 = self.triangles[t1], self.triangles[t2]
        a = tri1[(i1 + 1) % 3]
        b = tri1[(i1 + 2) % 3]
        c = tri2[(i2 + 1) % 3]
        d = tri2[(i2 + 2) % 3]
        return a, b, c, d

    def flip(self, e):
        """Diagonal exchange on edge ``e``; the new diagonal reuses label
        ``e``.  Returns the new triangulation."""
        t1, _ = self._side[e]
        t2, _ = self._side[~e]
        a, b, c, d = self.flip_quad(e)
        tris = list(self.triangles)
        tris[t1] = (c, e, b)
        tris[t2] = (a, ~e, d)
        return Triangulation(tris)

    def relabel(self, perm):
        """Apply a sign-equivariant relabeling.  ``perm`` maps each
        nonnegative edge index to a signed label; ``~e`` maps to the
        complement of ``perm[e]``."""

        def image(lab):
            return perm[lab] if lab >= 0 else ~perm[~lab]

        return Triangulation(
            [tuple(image(lab) for lab in tri) for tri in self.triangles]
        )


def corner_coordinates(tri, weights):
    """Corner coordinates of one triangle (a triple of signed labels) for a
    weight vector indexed by edges."""
    w = [weights[edge_index(lab)] for lab in tri]
    return tuple((w[i] + w[(i - 1) % 3] - w[(i + 1) % 3]) / 2 for i in range(3))


def check_lamination(triangulation, weights, tol=0):
    """True iff all weights are nonnegative and every corner coordinate is
    >= -tol (the switch condition in edge coordinates)."""
    if any(w < -tol for w in weights):
        return False
    for tri in triangulation.triangles:
        if any(n < -tol for n in corner_coordinates(tri, weights)):
            return False
    return True


def flip_weight(quad, e, tol=0):
    """Tropical flip rule: new diagonal weight for a square with cyclically
    ordered side weights ``quad = (a, b, c, d)`` and old diagonal weight
    ``e``.  Raises NegativeResult below ``-tol`` (the vector then no longer
    describes a carried lamination)."""
    a, b, c, d = quad
    res = max(a + c, b + d) - e
    if res < -tol:
        raise NegativeResult("flip produced negative weight %r" % (res,))
    return res


def isomorphisms(src, dst, weights_src=None, weights_dst=None, scale=None, tol=None):
    """Yield orientation-preserving label-isomorphisms taking ``src`` to
    ``dst``.

    Each isomorphism is returned as a list ``perm`` with ``perm[e]`` the
    signed image label of edge ``e``.  If weight vectors and a scale are
    given, only isomorphisms with ``weights_src[e] ~= scale *
    weights_dst[edge_index(perm[e])]`` (relative tolerance ``tol``) are
    yielded.
    """
    if len(src.triangles) != len(dst.triangles):
        return
    nt = len(src.triangles)
    for t0 in range(nt):
        for rot in range(3):
            perm = [None] * src.num_edges
            ok = True
            # seed triangle 0 of src onto (t0, rot) of dst, then propagate
            # across edges breadth-first.
            tri_image = [None] * nt
            stack = [(0, t0, rot)]
            tri_image[0] = (t0, rot)
            while stack and ok:
                s, d_t, d_rot = stack.pop()
                stri, dtri = src.triangles[s], dst.triangles[d_t]
                for i in range(3):
                    slab = stri[i]
                    dlab = dtri[(i + d_rot) % 3]
                    e = edge_index(slab)
                    img = dlab if slab >= 0 else ~dlab
                    if perm[e] is None:
                        if weights_src is not None:
                            ws = weights_src[e]
                            wd = weights_dst[edge_index(img)]
                            if abs(ws - scale * wd) > tol * (abs(ws) + 1):
                                ok = False
                                break
                        perm[e] = img
                        # propagate to the neighbor across this edge
                        ns, ni = src.side(~slab)
                        nd, ndi = dst.side(~dlab)
                        rot2 = (ndi - ni) % 3
                        if tri_image[ns] is None:
                            tri_image[ns] = (nd, rot2)
                            stack.append((ns, nd, rot2))
                        elif tri_image[ns] != (nd, rot2):
                            ok = False
                            break
                    elif perm[e] != img:
                        ok = False
                        break
            if not (ok and all(p is not None for p in perm)):
                continue
            if len({edge_index(p) for p in perm}) != src.num_edges:
                continue
            if src.relabel(perm) == dst:
                yield perm
