"""Hyperbolic shapes, gluing equations, and volumes.

Unknowns are one complex shape z per tetrahedron, handled in log form
(log z, log(1-z)) with branches tracked continuously along the Newton path.
The three dihedral-angle parameters of a tetrahedron are z, 1/(1-z) and
1-1/z, whose logs are (1,0,0), (0,-1,0) and (-1,1,1) in the basis
(log z, log(1-z), i*pi) -- they sum to the identity i*pi, which pins the
bookkeeping.

The system has one equation per edge (incident log-angles sum to 2*pi*i)
and one completeness equation per cusp: the log-holonomy of an essential
curve on the cusp torus vanishes, making the similarity holonomy a
translation.  The curve is found on the cusp link (one triangle per
tetrahedron corner, glued along faces): a fundamental cycle of the dual
graph whose equation row is independent of the edge rows is essential.

The integer multiple of 2*pi*i on the right-hand side of a completeness
equation is fixed from the initial guess; a wrong guess makes that system
inconsistent and the restart policy moves on.  Solutions are certified
branch-free: the product form of every equation must satisfy
|(-1)^c * prod z^a (1-z)^b - 1| < tol, which any valid branch combination
obeys.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from mpmath import mp

from .errors import DegenerateShape, GluingInconsistency, SolverDiverged
from .mtorus import _FACE, _SLOT_PAIR, _SLOT_VERTICES

# log-parameter triples (a, b, c): a*log z + b*log(1-z) + c*i*pi
_PAIR_TRIPLE = ((1, 0, 0), (0, -1, 0), (-1, 1, 1))

V3 = mp.mpf("1.0149416064096536250212025542745202859416893075302997920174891067")

# face index opposite each local vertex (see mtorus._FACE)
_OPP_FACE = {2: 0, 3: 1, 1: 2, 0: 3}

_EVEN = {
    p for p in
    [(0, 1, 2, 3), (0, 2, 3, 1), (0, 3, 1, 2), (1, 0, 3, 2), (1, 2, 0, 3),
     (1, 3, 2, 0), (2, 0, 1, 3), (2, 1, 3, 0), (2, 3, 0, 1), (3, 0, 2, 1),
     (3, 1, 0, 2), (3, 2, 1, 0)]
}


def _cyclic_others(v):
    """The other three vertices in the cyclic order making (v, w1, w2, w3)
    an even permutation; link-triangle sides are faces opposite the w's."""
    rest = [w for w in range(4) if w != v]
    for order in [tuple(rest), (rest[0], rest[2], rest[1])]:
        if (v,) + order in _EVEN:
            return order
    raise AssertionError("unreachable")


@dataclass
class GluingSystem:
    num_tets: int
    a: np.ndarray          # (rows, tets) integer coefficients of log z
    b: np.ndarray          # (rows, tets) integer coefficients of log(1-z)
    c: np.ndarray          # (rows,) integer i*pi constants
    is_cusp: np.ndarray    # (rows,) bool
    num_edge_equations: int
    num_cusp_equations: int


@dataclass
class ShapeAssignment:
    shapes: tuple              # complex z per tet (mpmath mpc)
    normalized_shapes: tuple   # representatives in B
    residual: float            # max multiplicative equation defect
    geometric: bool
    degenerate: bool           # some |Im z| at or below the flat threshold
    min_im: object
    volume: object
    precision: int

    def to_json(self):
        return {
            "shapes": [mp.nstr(z, 17) for z in self.normalized_shapes],
            "residual": float(self.residual),
            "geometric": bool(self.geometric),
            "degenerate": bool(self.degenerate),
            "min_im": float(self.min_im),
            "volume": mp.nstr(self.volume, 17),
            "precision": self.precision,
        }


def _edge_rows(tv):
    T = tv.num_tetrahedra
    rows = []
    for inc in tv.edge_incidences:
        a = np.zeros(T, dtype=np.int64)
        b = np.zeros(T, dtype=np.int64)
        c = 0
        for tet, slot in inc:
            ta, tb, tc = _PAIR_TRIPLE[_SLOT_PAIR[slot]]
            a[tet] += ta
            b[tet] += tb
            c += tc
        rows.append((a, b, c))
    return rows


def _cusp_cycle_rows(tv):
    """One holonomy row per cusp from an essential curve on its link.

    Link triangles are tetrahedron corners (tet, vertex); a dual hop crosses
    a face shared by two corners.  Fundamental cycles of a spanning tree are
    tried in turn; a cycle whose row is linearly independent of the edge
    rows is essential on the cusp torus (vertex-linking cycles are edge-row
    combinations).
    """
    T = tv.num_tetrahedra
    nodes = [(t, v) for t in range(T) for v in range(4)]

    def neighbor(node, face):
        t, v = node
        target, tface, vmap = tv.tetrahedra[t].gluings[face]
        return (target, dict(vmap)[v]), tface

    # spanning forest; parent[n] = (parent node, face of parent, face of n)
    parent = {}
    comp_of = {}
    ncomp = 0
    for start in nodes:
        if start in comp_of:
            continue
        parent[start] = None
        comp_of[start] = ncomp
        queue = [start]
        while queue:
            cur = queue.pop()
            for w in _cyclic_others(cur[1]):
                face = _OPP_FACE[w]
                nxt, nface = neighbor(cur, face)
                if nxt not in comp_of:
                    comp_of[nxt] = ncomp
                    parent[nxt] = (cur, face, nface)
                    queue.append(nxt)
        ncomp += 1
    cusp_of_comp = {}
    for node, comp in comp_of.items():
        cusp = tv.tetrahedra[node[0]].cusps[node[1]]
        assert cusp_of_comp.setdefault(comp, cusp) == cusp
    if ncomp != tv.num_cusps:
        raise GluingInconsistency(
            "%d cusp link components for %d cusps" % (ncomp, tv.num_cusps)
        )

    def ascent(node):
        """Directed hops (src, f_src, dst, f_dst) from ``node`` to the
        root of its tree."""
        hops = []
        while parent[node] is not None:
            up, f_up, f_node = parent[node]
            hops.append((node, f_node, up, f_up))
            node = up
        return hops

    def cycle_row(hops):
        """Signed corner sum along a closed hop sequence.

        The log-holonomy of the loop is the signed sum of corner parameters
        plus i*pi times a parity: passing a corner contributes the corner
        shape (or its inverse, by turn direction), and chaining one pass's
        exit side into the next pass's entry side negates the side vector
        whenever the pivot corner jumps to the other end of the shared side.
        The jump count is accumulated by carrying the pivot's image through
        the face gluings (a warm-up lap seeds the carry, since the loop is
        closed)."""
        a = np.zeros(T, dtype=np.int64)
        b = np.zeros(T, dtype=np.int64)
        c = 0
        flips = 0
        carry = None
        for lap in range(2):
            count = lap == 1
            for k, (src, f_out, _, _) in enumerate(hops):
                f_in = hops[k - 1][3]  # face through which src was entered
                t, v = src
                if f_in != f_out:
                    order = _cyclic_others(v)
                    w_in = next(w for w in order if _OPP_FACE[w] == f_in)
                    w_out = next(w for w in order if _OPP_FACE[w] == f_out)
                    w_mid = next(
                        w for w in order if w not in (w_in, w_out)
                    )
                    if count:
                        i = order.index(w_in)
                        sign = 1 if order[(i + 1) % 3] == w_out else -1
                        slot = _SLOT_VERTICES.index(
                            tuple(sorted((v, w_mid)))
                        )
                        ta, tb, tc = _PAIR_TRIPLE[_SLOT_PAIR[slot]]
                        a[t] += sign * ta
                        b[t] += sign * tb
                        c += sign * tc
                        assert carry in (w_mid, w_out)
                        if carry == w_out:
                            flips += 1
                    carry = w_mid  # exit side runs pivot -> w_in
                # a backtrack (f_in == f_out) passes no corner: the side
                # vector returns unchanged and the carry just maps through
                _, _, vmap = tv.tetrahedra[t].gluings[f_out]
                if carry is not None:
                    carry = dict(vmap)[carry]
        return a, b, c + flips % 2

    base = np.array(
        [np.concatenate([a, b]) for a, b, _ in _edge_rows(tv)],
        dtype=np.float64,
    )
    base_rank = np.linalg.matrix_rank(base)
    chosen = {}
    for node in nodes:
        comp = comp_of[node]
        if comp in chosen:
            continue
        for w in _cyclic_others(node[1]):
            face = _OPP_FACE[w]
            other, oface = neighbor(node, face)
            if parent[other] is not None and parent[other][0] == node \
               and parent[other][1] == face:
                continue  # tree edge
            if parent[node] is not None and parent[node][0] == other \
               and parent[node][1] == oface:
                continue
            # closed walk: node -> root -> other -> node
            up = ascent(node)
            down = [(d, fd, s, fs) for s, fs, d, fd in reversed(ascent(other))]
            hops = up + down + [(other, oface, node, face)]
            a, b, c = cycle_row(hops)
            cand = np.concatenate([a, b]).astype(np.float64)
            if np.linalg.matrix_rank(np.vstack([base, cand])) > base_rank:
                chosen[comp] = (a, b, c)
                break
        if comp not in chosen:
            continue
    for comp in range(ncomp):
        if comp not in chosen:
            raise GluingInconsistency(
                "no essential cusp curve found for cusp %d"
                % cusp_of_comp[comp]
            )
    return [chosen[c] for c in sorted(chosen)]


def build_gluing_system(tv):
    edge_rows = _edge_rows(tv)
    cusp_rows = _cusp_cycle_rows(tv)
    rows = edge_rows + cusp_rows
    T = tv.num_tetrahedra
    a = np.array([r[0] for r in rows], dtype=np.int64)
    b = np.array([r[1] for r in rows], dtype=np.int64)
    c = np.array([r[2] for r in rows], dtype=np.int64)
    is_cusp = np.array(
        [False] * len(edge_rows) + [True] * len(cusp_rows)
    )
    return GluingSystem(
        num_tets=T, a=a, b=b, c=c, is_cusp=is_cusp,
        num_edge_equations=len(edge_rows),
        num_cusp_equations=len(cusp_rows),
    )


def _residual_vector(system, u, v, targets):
    return system.a @ u + system.b @ v + 1j * np.pi * system.c - targets


def check_solution(system, shapes, tol):
    """Branch-free certificate: every equation's product form must satisfy
    |(-1)^c * prod z^a (1-z)^b - 1| < tol.  Works at mpmath precision."""
    worst = mp.mpf(0)
    logs = [mp.log(z) for z in shapes]
    logs1 = [mp.log(1 - z) for z in shapes]
    for r in range(len(system.c)):
        s = mp.mpc(0)
        for i in range(system.num_tets):
            if system.a[r][i]:
                s += int(system.a[r][i]) * logs[i]
            if system.b[r][i]:
                s += int(system.b[r][i]) * logs1[i]
        defect = abs(mp.e ** s * (-1) ** int(system.c[r]) - 1)
        worst = max(worst, defect)
    return worst


def _newton_double(system, z0, max_iter=500):
    """Newton on complex128 from start vector z0, with a backtracking line
    search on the residual norm; returns (z, u, v, targets, residual) or
    None."""
    T = system.num_tets
    z = np.array(z0, dtype=np.complex128)
    u = np.log(z)
    v = np.log(1 - z)
    # right-hand sides: edges want 2*pi*i; cusp rows want the nearest
    # multiple of 2*pi*i at the start (a wrong pick fails and restarts)
    targets = np.where(system.is_cusp, 0.0, 2j * np.pi)
    raw = system.a @ u + system.b @ v + 1j * np.pi * system.c
    k = np.round(np.imag(raw) / (2 * np.pi))
    targets = np.where(system.is_cusp, 2j * np.pi * k, targets)
    tol = 1e-12 * (1 + T)
    F = _residual_vector(system, u, v, targets)
    nrm = np.linalg.norm(F)
    for _ in range(max_iter):
        if np.max(np.abs(F)) < tol:
            return z, u, v, targets, np.max(np.abs(F))
        J = system.a / z[None, :] - system.b / (1 - z)[None, :]
        # the system is mildly overdetermined and rank-deficient (edge rows
        # are dependent); pivoted QR handles that at a fraction of the SVD
        # cost of numpy's lstsq
        step, *_ = scipy.linalg.lstsq(J, -F, lapack_driver="gelsy",
                                      check_finite=False)
        # initial damping keeps the multiplicative change per shape small so
        # the path never crosses 0 or 1 (branch tracking stays valid)
        scale = 1.0
        ratio = np.max(np.abs(step) / np.minimum(np.abs(z), np.abs(1 - z)))
        if ratio > 0.5:
            scale = 0.5 / ratio
        accepted = False
        for _ in range(20):
            znew = z + scale * step
            if not (np.any(np.abs(znew) < 1e-10)
                    or np.any(np.abs(1 - znew) < 1e-10)):
                unew = u + np.log(znew / z)
                vnew = v + np.log((1 - znew) / (1 - z))
                Fnew = _residual_vector(system, unew, vnew, targets)
                nrm_new = np.linalg.norm(Fnew)
                if nrm_new < nrm * (1 - 1e-4 * scale):
                    z, u, v = znew, unew, vnew
                    F, nrm = Fnew, nrm_new
                    accepted = True
                    break
            scale *= 0.5
        if not accepted:
            return None
    return None


def _refine_mp(system, z, u, v, targets, precision):
    """Mixed-precision iterative refinement: residuals at mpmath precision,
    corrections through the double-precision normal equations."""
    T = system.num_tets
    zs = [mp.mpc(x) for x in z]
    J = system.a / z[None, :] - system.b / (1 - z)[None, :]
    JH = np.conjugate(J.T)
    lhs = JH @ J
    tgt = [mp.mpc(t) for t in targets]
    a, b, c = system.a, system.b, system.c
    for _ in range(max(2, precision // 40)):
        us = [mp.log(x) for x in zs]
        vs = [mp.log(1 - x) for x in zs]
        # fold principal-branch jumps into the integer targets: the double
        # solution fixed the right branch combination up to 2*pi*i steps
        F = []
        for r in range(len(c)):
            s = mp.mpc(0)
            for i in range(T):
                if a[r][i]:
                    s += int(a[r][i]) * us[i]
                if b[r][i]:
                    s += int(b[r][i]) * vs[i]
            s += 1j * mp.pi * int(c[r]) - tgt[r]
            s -= 2j * mp.pi * mp.nint(mp.im(s) / (2 * mp.pi))
            F.append(s)
        Fd = np.array([complex(x) for x in F])
        step = np.linalg.solve(lhs, -(JH @ Fd))
        zs = [x + mp.mpc(s) for x, s in zip(zs, step)]
    return zs


def normalize_shape(z):
    """Representative of the shape orbit {z, 1/(1-z), 1-1/z} in
    B = {|z| <= 1} intersect {|z-1| <= 1}, preferring Re in [0, 1]."""
    if z == 0 or z == 1:
        raise DegenerateShape("shape parameter %s" % mp.nstr(z, 8))
    eps = mp.mpf(2) ** (-mp.prec + 8)
    orbit = [z, 1 / (1 - z), 1 - 1 / z]
    inside = [w for w in orbit
              if abs(w) <= 1 + eps and abs(w - 1) <= 1 + eps]
    if not inside:
        raise DegenerateShape("no orbit representative in B")
    inside.sort(key=lambda w: (not (0 <= mp.re(w) <= 1), abs(mp.re(w) - 0.5)))
    return inside[0]


def tet_volume(z):
    """Signed hyperbolic volume of the ideal tetrahedron with shape z:
    sum of Lobachevsky values of the dihedral angles; negative for
    negatively oriented (Im z < 0), zero for flat."""
    if z == 0 or z == 1:
        raise DegenerateShape("shape parameter %s" % mp.nstr(z, 8))
    def lob(theta):
        return mp.clsin(2, 2 * theta) / 2
    alpha = mp.arg(z)
    beta = -mp.arg(1 - z)
    gamma = mp.pi - alpha - beta if mp.im(z) >= 0 else -mp.pi - alpha - beta
    if mp.im(z) == 0:
        return mp.mpf(0)
    return lob(alpha) + lob(beta) + lob(gamma)


FLATNESS_THRESHOLD = 1e-14


def triangulation_volume(shapes):
    return sum(tet_volume(z) for z in shapes)


def _edge_angles_unbranched(system, z, tol=1e-6):
    """True when the principal-branch dihedral angles of ``z`` sum to
    exactly 2*pi around every edge.  The product-form certificate cannot
    distinguish cone angle 2*pi from 4*pi; a branched solution passes it
    while developing a cone manifold, whose volume says nothing about the
    underlying manifold."""
    ang = (system.a @ np.angle(z) + system.b @ np.angle(1 - z)
           + np.pi * system.c)
    edges = ~system.is_cusp
    return bool(np.all(np.abs(ang[edges] - 2 * np.pi) < tol))


def solve_shapes(system, precision=212, max_restarts=28, seed=5,
                 hinge_flags=None, newton_iters=500):
    """Newton-solve the gluing system; returns a :class:`ShapeAssignment`.

    The gluing variety has many isolated solutions and Newton from a
    generic start frequently lands on a low-volume branch.  The decisive
    starts come from the taut angle structure: hinge tetrahedra begin at
    the regular shape and non-hinge tetrahedra at the flat shape -1
    (angle pi on the flipped-edge pair) lifted slightly off the real
    axis.  That point approximates the complete structure -- non-hinge
    tetrahedra really are thin -- and Newton from it reliably reaches the
    positively oriented solution when one exists.  A second informed
    family places non-hinge tetrahedra at large first-quadrant shapes,
    covering thin tetrahedra that degenerate toward the {0, 1, oo}
    triple instead of the balanced flat triple.  Generic starts (the
    regular shape, perturbations, wide random spreads) remain as
    fallbacks.  Candidates are ranked: a certified positively oriented
    solution wins outright; otherwise the unbranched solution (edge cone
    angles exactly 2*pi) of largest signed volume is kept, branched ones
    only as a last resort.  Raises SolverDiverged if no start converges.
    The double-precision winner is refined to ``precision`` bits and
    certified branch-free.
    """
    T = system.num_tets
    rng = random.Random(seed)
    regular = 0.5 + 3 ** 0.5 / 2 * 1j
    starts = []
    if hinge_flags is not None:
        flags = np.asarray(hinge_flags, dtype=bool)
        for delta in (0.25, 0.15):
            starts.append(np.where(flags, regular, -1 + 1j * delta))
        # thin tetrahedra can also degenerate toward the {0, 1, oo} triple,
        # whose shape at the pi-edge pair runs off to infinity; seed that
        # regime with large first-quadrant shapes
        for far in (8 * np.exp(0.25j * np.pi), 4 * np.exp(0.3j * np.pi),
                    16 * np.exp(0.2j * np.pi)):
            starts.append(np.where(flags, regular, far))
        for delta in (0.4, 0.08):
            starts.append(np.where(flags, regular, -1 + 1j * delta))
        for delta in (0.2, 0.3):
            jitter = np.array([
                0.05 * complex(rng.random() - 0.5, rng.random() - 0.5)
                for _ in range(T)
            ])
            starts.append(np.where(flags, regular, -1 + 1j * delta) + jitter)
        for _ in range(4):
            # independent per-tet lift heights reach solutions whose
            # non-hinge thinness varies along the triangulation
            lift = np.exp([rng.uniform(math.log(0.02), math.log(0.6))
                           for _ in range(T)])
            starts.append(np.where(flags, regular, -1 + 1j * lift))
        for _ in range(2):
            mods = np.exp([rng.uniform(math.log(2), math.log(40))
                           for _ in range(T)])
            args = np.array([rng.uniform(0.3, 1.4) for _ in range(T)])
            starts.append(np.where(flags, regular, mods * np.exp(1j * args)))
    starts += [[regular] * T, [0.5 + 0.5j] * T]
    for _ in range(4):
        starts.append([
            regular + 0.05 * complex(rng.random() - 0.5, rng.random() - 0.5)
            for _ in range(T)
        ])
    while len(starts) < max(max_restarts, 1):
        starts.append([
            0.5 + (rng.random() - 0.5) * 0.8
            + 1j * (0.2 + rng.random() * 1.0)
            for _ in range(T)
        ])
    starts = starts[:max(max_restarts, 1)]   # max_restarts = total budget
    got = None
    best = None        # (positive, unbranched, volume) of the winner
    seen = set()
    for z0 in starts:
        cand = _newton_double(system, z0, max_iter=newton_iters)
        if cand is None:
            continue
        key = tuple(np.round(cand[0], 8))
        if key in seen:
            continue
        seen.add(key)
        az = np.abs(cand[0])
        if np.max(az) > 1e8 or np.min(az) < 1e-8 \
                or np.min(np.abs(1 - cand[0])) < 1e-8:
            continue      # numerically degenerate limit, not a usable shape
        unbranched = _edge_angles_unbranched(system, cand[0])
        positive = unbranched and bool(
            np.min(np.imag(cand[0])) > FLATNESS_THRESHOLD
        )
        with mp.workprec(53):
            vol = float(sum(tet_volume(mp.mpc(x)) for x in cand[0]))
        rank = (positive, unbranched, vol)
        if best is None or rank > best:
            best = rank
            got = cand
        if positive:
            break      # the complete structure; nothing can outrank it
    if got is None:
        raise SolverDiverged(
            "Newton failed from %d starts" % len(starts)
        )
    z, u, v, targets, _ = got
    with mp.workprec(precision):
        zs = _refine_mp(system, z, u, v, targets, precision)
        residual = check_solution(system, zs, mp.mpf(10) ** -10)
        if residual > mp.mpf(10) ** -10:
            raise SolverDiverged(
                "certificate failed: defect %s" % mp.nstr(residual, 5)
            )
        ims = [mp.im(x) for x in zs]
        degenerate = any(abs(x) <= FLATNESS_THRESHOLD for x in ims)
        geometric = (not degenerate) and min(ims) > FLATNESS_THRESHOLD
        normalized = tuple(normalize_shape(x) for x in zs)
        # reported flatness margin: orbit representatives make it comparable
        min_im = min(mp.im(x) for x in normalized)
        return ShapeAssignment(
            shapes=tuple(zs),
            normalized_shapes=normalized,
            residual=float(residual),
            geometric=geometric,
            degenerate=degenerate,
            min_im=min_im,
            volume=triangulation_volume(zs),
            precision=precision,
        )
