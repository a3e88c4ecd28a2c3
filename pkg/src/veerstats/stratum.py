"""Singularity structure of a carried lamination, and puncturing.

The complementary regions of the stable lamination are reconstructed from the
corner coordinates: each triangle contributes a central trigon whose three
cusps sit in the weight gaps on its edges (on the slot-``k`` edge at distance
``n_k`` from corner ``k``); corner bands carry the gap across triangles.  A
gap that meets another central cusp, or runs off the end of an edge into a
puncture's corner region, merges the two regions and annihilates the cusp; a
gap that keeps wandering is a genuine spike of its region.  Union-find over
the central pieces and the puncture regions then yields the complementary
regions, whose surviving spike counts are the prong counts.

Regions containing no puncture are singularities of the foliation in the
surface's interior (k-prong, k >= 3); the fiber of the mapping torus is the
surface punctured there as well, so one new puncture is inserted per such
region by coning a member triangle from a new vertex.

Everything is validated against the Euler-Poincare relation
``sum(1 - p/2) = 2 - 2g`` over all regions (on the closed surface).
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mp

from .bases import cone_triangle
from .errors import StratumDetectionFailure
from .surface import SurfaceSpec, corner_coordinates, edge_index


@dataclass(frozen=True)
class StratumResult:
    surface: SurfaceSpec          # fiber with singular regions punctured
    triangulation: object         # triangulation of the punctured fiber
    weights: tuple                # transferred lamination
    prongs: dict                  # vertex id -> prong count (all punctures)
    added_vertices: tuple         # vertex ids of the newly inserted punctures
    regions: tuple                # frozenset of region members, for tests
    vertex_of_puncture: tuple     # puncture index -> vertex id, if punctures
                                  # of the input triangulation were supplied


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def _trace_cusp(tri, weights, corners, t, k, tol, cap):
    """Follow the central cusp of triangle ``t`` on its slot-``k`` edge.

    A terminating trace is a degenerate alignment: the cusp meets another
    central cusp tip-to-tip ('central') or opens into a puncture's corner
    region ('vertex'); either way the regions merge and the cusp is not a
    prong.  A trace still wandering after ``cap`` band crossings is a
    genuine spike of its complementary region, asymptotic to a leaf
    ('spike'): its positions are irrational reflections that never align.
    """
    lab = tri.triangles[t][k]
    d = corners[t][k]
    for _ in range(cap):
        # cross the edge to the other side
        t2, i2 = tri.side(~lab)
        w = weights[edge_index(lab)]
        d = w - d
        n = corners[t2][i2]
        if abs(d - n) <= tol:
            return ("central", t2, i2)
        if d <= tol:
            return ("vertex", tri.corner_vertex(t2, i2))
        if d >= w - tol:
            return ("vertex", tri.corner_vertex(t2, (i2 + 1) % 3))
        if d < n:
            # inside the corner-i2 band; emerge on the previous edge
            lab = tri.triangles[t2][(i2 - 1) % 3]
            d = weights[edge_index(lab)] - d
        else:
            # inside the corner-(i2+1) band; emerge on the next edge
            lab = tri.triangles[t2][(i2 + 1) % 3]
            d = w - d
    return ("spike",)


def analyze_regions(tri, weights, tol):
    """Union-find the complementary regions and count their spikes.

    Returns (regions, spikes, punctured) where regions maps root -> member
    set, spikes maps root -> prong count and punctured maps root -> set of
    vertex ids in the region.
    """
    corners = [corner_coordinates(tri.triangles[t], weights)
               for t in range(tri.num_triangles)]
    for t, n in enumerate(corners):
        if min(n) < -tol:
            raise StratumDetectionFailure(
                "negative corner coordinate %s" % mp.nstr(min(n), 5)
            )
    items = [("c", t) for t in range(tri.num_triangles)]
    items += [("v", v) for v in range(tri.num_vertices)]
    uf = _UnionFind(items)
    cap = max(200, 20 * tri.num_triangles)
    # A cusp survives as a prong of its region unless a degenerate alignment
    # annihilates it: either its own trace terminates, or another cusp's
    # trace terminates onto it.
    annihilated = set()
    for t in range(tri.num_triangles):
        for k in range(3):
            end = _trace_cusp(tri, weights, corners, t, k, tol, cap)
            if end[0] == "central":
                _, t2, k2 = end
                if (t2, k2) == (t, k):
                    raise StratumDetectionFailure(
                        "cusp (%d, %d) traced onto itself" % (t, k)
                    )
                uf.union(("c", t), ("c", t2))
                annihilated.add((t, k))
                annihilated.add((t2, k2))
            elif end[0] == "vertex":
                uf.union(("c", t), ("v", end[1]))
                annihilated.add((t, k))
    surviving = {
        (t, k)
        for t in range(tri.num_triangles)
        for k in range(3)
        if (t, k) not in annihilated
    }
    regions, spikes, punctured = {}, {}, {}
    for item in items:
        root = uf.find(item)
        regions.setdefault(root, set()).add(item)
        spikes.setdefault(root, 0)
        punctured.setdefault(root, set())
        if item[0] == "v":
            punctured[root].add(item[1])
    for t, k in surviving:
        spikes[uf.find(("c", t))] += 1
    return regions, spikes, punctured


def _vertex_renaming(old, new):
    """Map vertex ids of ``old`` to ids of ``new`` after a coning; every
    edge of ``old`` persists with the same endpoints and direction."""
    out = {}
    for e in range(old.num_edges):
        for u, v in zip(old.edge_vertices(e), new.edge_vertices(e)):
            assert out.setdefault(u, v) == v, "inconsistent vertex renaming"
    assert len(out) == old.num_vertices
    return out


def puncture_stratum(spec, tri, weights, precision=None, tol=None,
                     punctures=None):
    """Puncture the surface at the unpunctured singular regions of the
    carried lamination and transfer the weights.

    ``weights`` is the converged stable lamination on the base triangulation
    of ``spec``.  Returns a :class:`StratumResult`.
    """
    if tol is None:
        prec = precision or mp.prec
        tol = mp.mpf(2) ** (-max(24, prec // 3))
    regions, spikes, punctured = analyze_regions(tri, weights, tol)

    # sanity: each region has at most one puncture and a legal spike count
    euler = mp.mpf(0)
    for root, members in regions.items():
        p = spikes[root]
        if len(punctured[root]) > 1:
            raise StratumDetectionFailure(
                "region with %d punctures" % len(punctured[root])
            )
        if punctured[root]:
            if p < 1:
                raise StratumDetectionFailure("puncture with no prongs")
        else:
            if p < 3:
                raise StratumDetectionFailure(
                    "unpunctured region with %d spikes" % p
                )
        euler += 1 - mp.mpf(p) / 2
    if abs(euler - (2 - 2 * spec.genus)) > mp.mpf("0.25"):
        raise StratumDetectionFailure(
            "Euler-Poincare mismatch: %s vs %d"
            % (mp.nstr(euler, 5), 2 - 2 * spec.genus)
        )

    prongs = {}
    for root, verts in punctured.items():
        for v in verts:
            prongs[v] = spikes[root]

    # cone one member triangle per unpunctured region
    to_puncture = sorted(
        (min(t for kind, t in regions[root] if kind == "c"), spikes[root])
        for root in regions if not punctured[root]
    )
    out_tri = tri
    vecs = [tuple(weights)]
    added = []
    names = {v: v for v in range(tri.num_vertices)}  # input id -> output id
    for t, p in to_puncture:
        before = out_tri
        out_tri, vecs, corner = cone_triangle(out_tri, t, vecs)
        rename = _vertex_renaming(before, out_tri)
        names = {u: rename[v] for u, v in names.items()}
        for i, v in enumerate(added):
            added[i] = rename[v]
        prongs = {rename[v]: p2 for v, p2 in prongs.items()}
        v = out_tri.corner_vertex(*corner)
        added.append(v)
        prongs[v] = p
    out_spec = SurfaceSpec(spec.genus, spec.punctures + len(added))
    return StratumResult(
        surface=out_spec,
        triangulation=out_tri,
        weights=tuple(vecs[0]),
        prongs=prongs,
        added_vertices=tuple(added),
        regions=tuple(frozenset(m) for m in regions.values()),
        vertex_of_puncture=(
            None if punctures is None
            else tuple(names[v] for v in punctures)
        ),
    )
