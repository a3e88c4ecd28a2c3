"""Layered triangulation of the mapping torus from a periodic splitting.

Every flip in the periodic window becomes one ideal tetrahedron laid on the
evolving surface: its two bottom faces are the triangles destroyed by the
flip, its two top faces the triangles created, the old diagonal is the
bottom pi-edge and the new diagonal the top pi-edge.  "Below" pointers track
which tetrahedron face currently shows on each surface triangle; the final
layer closes onto the first via the periodicity isomorphism.

Local tetrahedron combinatorics, for a flip of edge e with square sides
(a, b, c, d) as returned by ``flip_quad``: the square corners are
X (start of e), Y (end of e), C and A, with sides running b: A->X,
c: X->C, d: C->Y, a: Y->A, and the new diagonal running C->A.  Local
vertex ids are 0=X, 1=Y, 2=C, 3=A, so the opposite-edge pairs are
(bottom diag, top diag) = (01, 23), (c, a) = (02, 13), (b, d) = (03, 12) --
the standard (z, z', z'') order used by the geometry solver.

Edge classes of the 3-manifold are lifetimes of surface edges: an edge is
born as a top diagonal, persists through layers where it is not flipped,
and dies as a bottom diagonal; the closing isomorphism splices lifetimes
across the seam.  Each class therefore carries exactly two pi angles, and
the class count must equal the tetrahedron count.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import GluingInconsistency, NotVeering
from .surface import edge_index

# face f of a tetrahedron is the one spanned by _FACE[f] (local vertex ids);
# 0, 1 are the bottom faces, 2, 3 the top faces
_FACE = ((0, 1, 3), (1, 0, 2), (0, 2, 3), (1, 3, 2))

# local edge slots: 0 bottom diagonal, 1 top diagonal, 2..5 equatorial
# edges c, a, b, d; slot -> opposite-pair index (shape parameter class)
_SLOT_PAIR = (0, 0, 1, 1, 2, 2)
_SLOT_VERTICES = ((0, 1), (2, 3), (0, 2), (1, 3), (0, 3), (1, 2))


@dataclass
class Tetrahedron:
    index: int
    layer: int               # absolute layer of the flip (bottom of the tet)
    flipped_edge: int
    cusps: tuple             # cusp id per local vertex (X, Y, C, A)
    gluings: list = field(default_factory=lambda: [None] * 4)
    edge_classes: tuple = None  # manifold edge id per local slot 0..5


@dataclass
class VeeringTriangulation:
    tetrahedra: list
    num_edges: int
    edge_incidences: tuple   # per edge: tuple of (tet, slot)
    edge_colors: tuple       # per edge: 'red' | 'blue' (after coloring)
    total_order: tuple
    layers: tuple            # (layer index, tuple of tet ids) per layer
    fiber: object            # SurfaceSpec of the punctured fiber
    monodromy: str
    num_cusps: int
    cusp_of_vertex: tuple    # start-state vertex id -> cusp id

    @property
    def num_tetrahedra(self):
        return len(self.tetrahedra)

    def pi_edges(self, tet):
        t = self.tetrahedra[tet]
        return t.edge_classes[0], t.edge_classes[1]

    def is_hinge(self, tet):
        bot, top = self.pi_edges(tet)
        return self.edge_colors[bot] != self.edge_colors[top]

    def to_json(self):
        return {
            "tets": [
                {
                    "layer": t.layer,
                    "flipped_edge": t.flipped_edge,
                    "cusps": list(t.cusps),
                    "gluings": [
                        {"target": g[0], "face": g[1],
                         "vertex_map": {str(k): v for k, v in sorted(g[2])}}
                        for g in t.gluings
                    ],
                    "edge_classes": list(t.edge_classes),
                }
                for t in self.tetrahedra
            ],
            "edge_colors": list(self.edge_colors),
            "taut_angles": [
                [("pi" if _SLOT_PAIR[s] == 0 else "0") for s in range(6)]
                for _ in self.tetrahedra
            ],
            "total_order": list(self.total_order),
            "layers": [[l, list(ids)] for l, ids in self.layers],
            "fiber": str(self.fiber),
            "monodromy": self.monodromy,
            "num_cusps": self.num_cusps,
            "cusp_of_vertex": list(self.cusp_of_vertex),
        }


def triangulation_from_json(data, fiber=None):
    """Inverse of :meth:`VeeringTriangulation.to_json` (the interchange
    format); ``fiber`` may override the parsed surface spec."""
    from .surface import SurfaceSpec
    tets = []
    for i, rec in enumerate(data["tets"]):
        tets.append(Tetrahedron(
            index=i,
            layer=rec["layer"],
            flipped_edge=rec["flipped_edge"],
            cusps=tuple(rec["cusps"]),
            gluings=[
                (g["target"], g["face"],
                 tuple(sorted((int(k), v)
                              for k, v in g["vertex_map"].items())))
                for g in rec["gluings"]
            ],
            edge_classes=tuple(rec["edge_classes"]),
        ))
    num_edges = 1 + max(e for t in tets for e in t.edge_classes)
    incidences = {e: [] for e in range(num_edges)}
    for t in tets:
        for slot, e in enumerate(t.edge_classes):
            incidences[e].append((t.index, slot))
    if fiber is None:
        m = re.match(r"S_\{(\d+),(\d+)\}", data["fiber"])
        assert m, "unparseable fiber %r" % data["fiber"]
        fiber = SurfaceSpec(int(m.group(1)), int(m.group(2)))
    cusp_of = data.get("cusp_of_vertex")
    return VeeringTriangulation(
        tetrahedra=tets,
        num_edges=num_edges,
        edge_incidences=tuple(tuple(incidences[e]) for e in range(num_edges)),
        edge_colors=tuple(data["edge_colors"]),
        total_order=tuple(data["total_order"]),
        layers=tuple((l, tuple(ids)) for l, ids in data["layers"]),
        fiber=fiber,
        monodromy=data["monodromy"],
        num_cusps=data["num_cusps"],
        cusp_of_vertex=tuple(cusp_of) if cusp_of else (),
    )


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def _glue(tets, a, b):
    """Glue two (tet, face, corner_map) records sharing a surface triangle;
    corner_map sends the triangle's corner slots to local vertex ids."""
    ta, fa, ca = a
    tb, fb, cb = b
    vmap = tuple(sorted((ca[s], cb[s]) for s in ca))
    back = tuple(sorted((v2, v1) for v1, v2 in vmap))
    if tets[ta].gluings[fa] is not None or tets[tb].gluings[fb] is not None:
        raise GluingInconsistency("face glued twice")
    tets[ta].gluings[fa] = (tb, fb, vmap)
    tets[tb].gluings[fb] = (ta, fa, back)


def _iso_triangle_map(later, earlier, perm):
    """Per triangle of ``later``: (image triangle, slot map dict) under the
    label-isomorphism ``perm``."""
    out = []
    for t, tri in enumerate(later.triangles):
        slot_map, image_t = {}, None
        for j, lab in enumerate(tri):
            img = perm[lab] if lab >= 0 else ~perm[~lab]
            t2, j2 = earlier.side(img)
            if image_t is None:
                image_t = t2
            elif image_t != t2:
                raise GluingInconsistency("isomorphism splits a triangle")
            slot_map[j] = j2
        out.append((image_t, slot_map))
    return out


def assemble_mapping_torus(splitting, fiber, monodromy=""):
    """Build the layered taut triangulation from a
    :class:`~veerstats.splitting.PeriodicSplitting`; colors are assigned
    separately by :func:`assign_veering_colors`.
    """
    states = splitting.states
    n, m = splitting.start, splitting.period

    # cusps: orbits of start-state vertices under the induced vertex map
    vmap = splitting.vertex_map
    cusp_of = [None] * len(vmap)
    cusps = 0
    for v in range(len(vmap)):
        if cusp_of[v] is not None:
            continue
        cur = v
        while cusp_of[cur] is None:
            cusp_of[cur] = cusps
            cur = vmap[cur]
        cusps += 1

    tets = []
    layers = []
    num_triangles = states[n].triangulation.num_triangles
    below = {t: None for t in range(num_triangles)}
    open_bottom = {}
    for l in range(n, n + m):
        st, nxt = states[l], states[l + 1]
        tri = st.triangulation
        layer_ids = []
        for e in nxt.flips:
            t1, i1 = tri.side(e)
            t2, i2 = tri.side(~e)
            x = st.vertex_names[tri.corner_vertex(t1, i1)]
            y = st.vertex_names[tri.corner_vertex(t1, (i1 + 1) % 3)]
            a_v = st.vertex_names[tri.corner_vertex(t1, (i1 + 2) % 3)]
            c_v = st.vertex_names[tri.corner_vertex(t2, (i2 + 2) % 3)]
            tet = len(tets)
            tets.append(Tetrahedron(
                index=tet, layer=l, flipped_edge=e,
                cusps=(cusp_of[x], cusp_of[y], cusp_of[c_v], cusp_of[a_v]),
            ))
            layer_ids.append(tet)
            # bottom faces sit on the destroyed triangles
            cmap_b0 = {i1: 0, (i1 + 1) % 3: 1, (i1 + 2) % 3: 3}
            cmap_b1 = {i2: 1, (i2 + 1) % 3: 0, (i2 + 2) % 3: 2}
            for t, face, cmap in [(t1, 0, cmap_b0), (t2, 1, cmap_b1)]:
                if below[t] is None:
                    open_bottom[t] = (tet, face, cmap)
                else:
                    _glue(tets, below[t], (tet, face, cmap))
            # the created triangles are (c, e, b) and (a, ~e, d)
            assert nxt.triangulation.triangles[t1][1] == e
            assert nxt.triangulation.triangles[t2][1] == ~e
            below[t1] = (tet, 2, {0: 0, 1: 2, 2: 3})
            below[t2] = (tet, 3, {0: 1, 1: 3, 2: 2})
        layers.append((l, tuple(layer_ids)))

    # close up through the periodicity isomorphism
    later, earlier = states[n + m].triangulation, states[n].triangulation
    tri_map = _iso_triangle_map(later, earlier, splitting.iso)
    used = set()
    untouched = {t for t in range(num_triangles)
                 if below[t] is None and t not in open_bottom}
    for t in range(num_triangles):
        if below[t] is None:
            # never destroyed in the window; its prism collapses and the
            # seam identification chains through it below
            if t not in untouched:
                raise GluingInconsistency(
                    "triangle %d destroyed but never rebuilt" % t
                )
            continue
        image_t, slot_map = tri_map[t]
        # a triangle untouched through the whole window contributes no
        # tetrahedron faces: the seam identification passes through it to
        # its own image, possibly several times
        hops = 0
        while image_t in untouched:
            nxt_t, nxt_map = tri_map[image_t]
            slot_map = {j: nxt_map[slot_map[j]] for j in slot_map}
            image_t = nxt_t
            hops += 1
            if hops > num_triangles:
                raise GluingInconsistency(
                    "seam identification cycles through untouched triangles"
                )
        if image_t not in open_bottom or image_t in used:
            raise GluingInconsistency("closing gluing has no open bottom")
        used.add(image_t)
        tet, face, cmap = below[t]
        ob_tet, ob_face, ob_cmap = open_bottom[image_t]
        _glue(tets,
              (tet, face, cmap),
              (ob_tet, ob_face, {j: ob_cmap[slot_map[j]] for j in slot_map}))
    if used != set(open_bottom):
        raise GluingInconsistency("open bottom faces left unglued")
    for t in tets:
        assert all(g is not None for g in t.gluings)

    # manifold edge classes: lifetimes of surface edges
    uf = _UnionFind()
    num_edges = earlier.num_edges
    for l in range(n, n + m + 1):
        for e in range(num_edges):
            uf.add((l, e))
    for l in range(n, n + m):
        flipped = set(states[l + 1].flips)
        for e in range(num_edges):
            if e not in flipped:
                uf.union((l, e), (l + 1, e))
    for e in range(num_edges):
        img = splitting.iso[e]
        uf.union((n + m, e), (n, edge_index(img)))

    incidences = {}
    for t in tets:
        tri = states[t.layer].triangulation
        e = t.flipped_edge
        a, b, c, d = tri.flip_quad(e)
        slot_edges = (
            (t.layer, e), (t.layer + 1, e),
            (t.layer, edge_index(c)), (t.layer, edge_index(a)),
            (t.layer, edge_index(b)), (t.layer, edge_index(d)),
        )
        ids = []
        for slot, le in enumerate(slot_edges):
            root = uf.find(le)
            incidences.setdefault(root, []).append((t.index, slot))
            ids.append(root)
        t.edge_classes = tuple(ids)

    roots = sorted(incidences)
    if len(roots) != len(tets):
        raise GluingInconsistency(
            "%d edge classes for %d tetrahedra" % (len(roots), len(tets))
        )
    edge_id = {r: i for i, r in enumerate(roots)}
    for t in tets:
        t.edge_classes = tuple(edge_id[r] for r in t.edge_classes)
    edge_inc = tuple(
        tuple(incidences[r]) for r in roots
    )
    # tautness: exactly two pi contributions around every edge
    for inc in edge_inc:
        pis = sum(1 for _, slot in inc if _SLOT_PAIR[slot] == 0)
        if pis != 2:
            raise GluingInconsistency(
                "edge with %d pi angles (incidences %r)" % (pis, inc)
            )

    return VeeringTriangulation(
        tetrahedra=tets,
        num_edges=len(roots),
        edge_incidences=edge_inc,
        edge_colors=(),
        total_order=tuple(range(len(tets))),
        layers=tuple(layers),
        fiber=fiber,
        monodromy=monodromy,
        num_cusps=cusps,
        cusp_of_vertex=tuple(cusp_of),
    )


def assign_veering_colors(tv):
    """Two-color the edges so every tetrahedron's equatorial square
    alternates colors around its boundary (the corner condition: each tet
    corner sees its two 0-angle edges in different colors).  The coloring is
    unique up to the global swap, resolved by making edge 0 red.
    """
    # adjacent square sides: (b,c) at X, (a,d) at Y, (a,b) at A, (c,d) at C
    constraints = []
    for t in tv.tetrahedra:
        c_e, a_e, b_e, d_e = t.edge_classes[2:6]
        constraints += [(b_e, c_e), (a_e, d_e), (a_e, b_e), (c_e, d_e)]
    adj = {e: set() for e in range(tv.num_edges)}
    for u, v in constraints:
        if u == v:
            raise NotVeering("edge %d adjacent to itself in a square" % u)
        adj[u].add(v)
        adj[v].add(u)
    color = [None] * tv.num_edges
    for start in range(tv.num_edges):
        if color[start] is not None:
            continue
        color[start] = 0
        stack = [start]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if color[v] is None:
                    color[v] = 1 - color[u]
                    stack.append(v)
                elif color[v] == color[u]:
                    raise NotVeering(
                        "edges %d, %d force a same-colored corner" % (u, v)
                    )
    # each component was seeded red at its lowest-indexed edge, which makes
    # the canonical rule (edge 0 red) hold globally
    if any(c is None for c in color):
        raise NotVeering("edge with no square incidence")
    assert color[0] == 0
    tv.edge_colors = tuple("red" if c == 0 else "blue" for c in color)
    return tv
