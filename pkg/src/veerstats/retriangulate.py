"""Pachner moves on ideal triangulations and geometric volume recovery.

When the layered triangulation of a mapping torus is not geometric, the
shape solution contains flat or negatively oriented tetrahedra and the
branch of the gluing variety holding the complete structure is hard to
certify.  A positively oriented solution on *any* triangulation of the
same manifold is unambiguous: it develops an honest hyperbolic structure,
so its volume is the manifold's volume.  This module searches for such a
triangulation by applying random 2-3 and 3-2 moves and re-solving.

The combinatorial conventions (face indexing, corner maps, edge slots)
match the assembled triangulations, so the gluing-equation builder works
on these complexes unchanged.
"""

from __future__ import annotations

import random

import numpy as np
from mpmath import mp

from .errors import GluingInconsistency
from .geometry import _OPP_FACE
from .mtorus import _SLOT_VERTICES

# vertex opposite each face (inverse of _OPP_FACE)
_FACE_OPP_V = {f: v for v, f in _OPP_FACE.items()}


class _Tet:
    __slots__ = ("gluings", "cusps")

    def __init__(self):
        self.gluings = {}
        self.cusps = [None] * 4


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x, y):
        self.parent[self.find(x)] = self.find(y)


class IdealComplex:
    """A mutable ideal triangulation given by face gluings.

    Exposes the same attributes the gluing-equation builder reads from an
    assembled triangulation: ``num_tetrahedra``, ``tetrahedra`` (with
    ``gluings`` and ``cusps``), ``edge_incidences``, ``num_cusps``.
    """

    def __init__(self, tets):
        self.tetrahedra = tets
        self._rebuild()

    @classmethod
    def from_triangulation(cls, tv):
        tets = []
        for src in tv.tetrahedra:
            t = _Tet()
            for f in range(4):
                target, tface, vmap = src.gluings[f]
                t.gluings[f] = (target, tface, tuple(vmap))
            tets.append(t)
        return cls(tets)

    @property
    def num_tetrahedra(self):
        return len(self.tetrahedra)

    def copy(self):
        tets = []
        for src in self.tetrahedra:
            t = _Tet()
            t.gluings = dict(src.gluings)
            t.cusps = list(src.cusps)
            tets.append(t)
        return IdealComplex(tets)

    def _rebuild(self):
        tets = self.tetrahedra
        T = len(tets)
        for t in range(T):
            assert len(tets[t].gluings) == 4, "unglued face"
            for f, (t2, f2, vmap) in tets[t].gluings.items():
                back = tets[t2].gluings[f2]
                assert back[0] == t and back[1] == f, "gluing not reciprocal"
        # edge classes: orbits of (tet, slot) under crossing either face
        # that contains the edge
        items = [(t, s) for t in range(T) for s in range(6)]
        uf = _UnionFind(items)
        for t in range(T):
            for s in range(6):
                u, v = _SLOT_VERTICES[s]
                for w in range(4):
                    if w in (u, v):
                        continue
                    f = _OPP_FACE[w]
                    t2, _, vmap = tets[t].gluings[f]
                    m = dict(vmap)
                    s2 = _SLOT_VERTICES.index(tuple(sorted((m[u], m[v]))))
                    uf.union((t, s), (t2, s2))
        classes = {}
        for it in items:
            classes.setdefault(uf.find(it), []).append(it)
        self.edge_incidences = [sorted(v) for v in
                                sorted(classes.values())]
        # cusp classes: orbits of corners under the face corner maps
        corners = [(t, v) for t in range(T) for v in range(4)]
        cf = _UnionFind(corners)
        for t in range(T):
            for f, (t2, _, vmap) in tets[t].gluings.items():
                for v1, v2 in vmap:
                    cf.union((t, v1), (t2, v2))
        roots = {}
        for t, v in corners:
            root = cf.find((t, v))
            if root not in roots:
                roots[root] = len(roots)
            tets[t].cusps[v] = roots[root]
        self.num_cusps = len(roots)

    # -- Pachner moves ---------------------------------------------------

    def _set_gluing(self, ta, fa, tb, fb, vmap):
        back = tuple(sorted((v2, v1) for v1, v2 in vmap))
        self.tetrahedra[ta].gluings[fa] = (tb, fb, tuple(sorted(vmap)))
        self.tetrahedra[tb].gluings[fb] = (ta, fa, back)

    def two_three(self, t0, f0):
        """Replace the two tetrahedra sharing face ``f0`` of ``t0`` by
        three around the new edge joining their apexes.  Returns True on
        success, False when the face is glued to its own tetrahedron."""
        tets = self.tetrahedra
        t1, f1, vmap01 = tets[t0].gluings[f0]
        if t1 == t0:
            return False
        a = _FACE_OPP_V[f0]
        b = _FACE_OPP_V[f1]
        P = [v for v in range(4) if v != a]
        m = dict(vmap01)
        old0 = dict(tets[t0].gluings)
        old1 = dict(tets[t1].gluings)

        new_ids = [t0, t1, len(tets)]
        new_tets = [_Tet() for _ in range(3)]
        # new tet i has vertices 0=a-apex, 1=b-apex, 2=P[i], 3=P[i+1]
        # internal: face {0,1,3} of tet i meets face {0,1,2} of tet i+1
        # portals: old external faces -> (new tet, face, old-label map)
        portal = {}
        for i in range(3):
            x, y, z = P[i], P[(i + 1) % 3], P[(i + 2) % 3]
            portal[(t0, _OPP_FACE[z])] = (
                new_ids[i], 2, {a: 0, x: 2, y: 3})
            portal[(t1, _OPP_FACE[m[z]])] = (
                new_ids[i], 3, {b: 1, m[x]: 2, m[y]: 3})

        for i in range(3):
            if new_ids[i] < len(tets):
                tets[new_ids[i]] = new_tets[i]
            else:
                tets.append(new_tets[i])
        for i in range(3):
            j = (i + 1) % 3
            self._set_gluing(new_ids[i], 0, new_ids[j], 1,
                             ((0, 0), (1, 1), (3, 2)))
        done = set()
        for (src_t, src_f), (nt, nf, omap) in portal.items():
            if (src_t, src_f) in done:
                continue
            old = old0 if src_t == t0 else old1
            tc, fc, vmap_old = old[src_f]
            mold = dict(vmap_old)
            if (tc, fc) in portal:
                nt2, nf2, omap2 = portal[(tc, fc)]
                vmap_new = tuple(
                    (omap[v1], omap2[v2]) for v1, v2 in vmap_old
                )
                self._set_gluing(nt, nf, nt2, nf2, vmap_new)
                done.add((tc, fc))
            else:
                vmap_new = tuple((omap[v1], v2) for v1, v2 in vmap_old)
                self._set_gluing(nt, nf, tc, fc, vmap_new)
            done.add((src_t, src_f))
        self._rebuild()
        return True

    def three_two(self, edge_class_index):
        """Replace the three distinct tetrahedra around a degree-three
        edge by two glued along a face.  Returns True on success."""
        inc = self.edge_incidences[edge_class_index]
        if len(inc) != 3 or len({t for t, _ in inc}) != 3:
            return False
        tets = self.tetrahedra
        # walk around the edge collecting (tet, s0, s1, o_prev, o_next)
        t, s = inc[0]
        e0, e1 = _SLOT_VERTICES[s]
        others = [w for w in range(4) if w not in (e0, e1)]
        ring = []
        cur_t, cur_e0, cur_e1, cur_prev = t, e0, e1, others[0]
        for _ in range(3):
            nxt_vertex = next(w for w in range(4)
                              if w not in (cur_e0, cur_e1, cur_prev))
            ring.append((cur_t, cur_e0, cur_e1, cur_prev, nxt_vertex))
            f = _OPP_FACE[cur_prev]
            t2, _, vmap = tets[cur_t].gluings[f]
            mm = dict(vmap)
            cur_t, cur_e0, cur_e1, cur_prev = (
                t2, mm[cur_e0], mm[cur_e1], mm[nxt_vertex])
        if cur_t != t or {cur_e0, cur_e1} != {e0, e1}:
            return False  # the walk did not close after three tets
        olds = {ti: dict(tets[ti].gluings) for ti, _, _, _, _ in ring}

        ids = sorted(ti for ti, _, _, _, _ in ring)
        id_a, id_b = ids[0], ids[1]
        drop = ids[2]
        new_a, new_b = _Tet(), _Tet()
        # new tet A: 0 = e0-apex, 1..3 = outer vertices p0,p1,p2
        # new tet B: 0 = e1-apex, 1..3 = outer vertices p0,p1,p2
        # ring[i] contributes outer vertex p_i = its exit vertex
        portal = {}
        for i, (ti, v_e0, v_e1, v_prev, v_next) in enumerate(ring):
            # face of ti opposite v_e1 has vertices {v_e0, v_prev, v_next}
            # = A's face {0, p_{i-1}, p_i}, which is opposite p_{i+1}
            lbl_prev = 1 + (i - 1) % 3
            lbl_next = 1 + i
            lbl_miss = 1 + (i + 1) % 3
            portal[(ti, _OPP_FACE[v_e1])] = (
                id_a, _OPP_FACE[lbl_miss],
                {v_e0: 0, v_prev: lbl_prev, v_next: lbl_next})
            portal[(ti, _OPP_FACE[v_e0])] = (
                id_b, _OPP_FACE[lbl_miss],
                {v_e1: 0, v_prev: lbl_prev, v_next: lbl_next})
        tets[id_a] = new_a
        tets[id_b] = new_b
        self._set_gluing(id_a, _OPP_FACE[0], id_b, _OPP_FACE[0],
                         ((1, 1), (2, 2), (3, 3)))
        done = set()
        for (src_t, src_f), (nt, nf, omap) in portal.items():
            if (src_t, src_f) in done:
                continue
            tc, fc, vmap_old = olds[src_t][src_f]
            if (tc, fc) in portal:
                nt2, nf2, omap2 = portal[(tc, fc)]
                vmap_new = tuple(
                    (omap[v1], omap2[v2]) for v1, v2 in vmap_old
                )
                self._set_gluing(nt, nf, nt2, nf2, vmap_new)
                done.add((tc, fc))
            else:
                vmap_new = tuple((omap[v1], v2) for v1, v2 in vmap_old)
                self._set_gluing(nt, nf, tc, fc, vmap_new)
            done.add((src_t, src_f))
        # remove the dropped tetrahedron, relabelling the last one
        last = len(tets) - 1
        if drop != last:
            moved = tets[last]
            tets[drop] = moved
            for f, (t2, f2, vmap) in list(moved.gluings.items()):
                if t2 == last:       # self-gluing
                    t2 = drop
                self._set_gluing(drop, f, t2, f2, vmap)
        tets.pop()
        self._rebuild()
        return True

    def randomize(self, rng, moves):
        """Random 2-3 moves with 3-2 simplifications mixed in to keep the
        size near where it started."""
        base = self.num_tetrahedra
        for _ in range(moves):
            if self.num_tetrahedra > base + 4 or (
                    self.num_tetrahedra > base and rng.random() < 0.5):
                candidates = [
                    i for i, inc in enumerate(self.edge_incidences)
                    if len(inc) == 3 and len({t for t, _ in inc}) == 3
                ]
                rng.shuffle(candidates)
                if any(self.three_two(i) for i in candidates):
                    continue
            for _ in range(8):
                t = rng.randrange(self.num_tetrahedra)
                f = rng.randrange(4)
                if self.two_three(t, f):
                    break


def geometric_volume(tv, precision=212, seed=11, max_attempts=25):
    """Volume of the underlying manifold via a geometric retriangulation.

    Applies random Pachner moves until Newton from the regular shape finds
    an unbranched, positively oriented solution, then refines and
    certifies it.  Returns an mpmath float, or None if every attempt
    fails.
    """
    from .geometry import (
        _edge_angles_unbranched,
        _newton_double,
        _refine_mp,
        build_gluing_system,
        check_solution,
        tet_volume,
    )
    rng = random.Random(seed)
    base = IdealComplex.from_triangulation(tv)
    regular = 0.5 + 3 ** 0.5 / 2 * 1j
    for attempt in range(max_attempts):
        ic = base
        if attempt:
            # each attempt restarts from the original and walks further
            ic = base.copy()
            ic.randomize(rng, 4 + 3 * attempt)
        try:
            system = build_gluing_system(ic)
        except GluingInconsistency:
            continue
        T = system.num_tets
        starts = [[regular] * T]
        for _ in range(2):
            starts.append([
                regular + 0.05 * complex(rng.random() - 0.5,
                                         rng.random() - 0.5)
                for _ in range(T)
            ])
        for z0 in starts:
            got = _newton_double(system, z0, max_iter=250)
            if got is None:
                continue
            z, u, v, targets, _ = got
            if not _edge_angles_unbranched(system, z):
                continue
            if np.min(np.imag(z)) <= 1e-9:
                continue
            with mp.workprec(precision):
                zs = _refine_mp(system, z, u, v, targets, precision)
                residual = check_solution(system, zs, mp.mpf(10) ** -10)
                if residual > mp.mpf(10) ** -10:
                    continue
                if min(mp.im(x) for x in zs) <= 0:
                    continue
                return sum(tet_volume(x) for x in zs)
    return None
