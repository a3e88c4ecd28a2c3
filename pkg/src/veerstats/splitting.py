"""Maximal splitting of the stable lamination to periodicity.

Starting from the stable lamination carried on the punctured fiber, each step
flips every edge of maximal weight simultaneously (they never share a
triangle) and records the flips as one layer.  The sequence of weighted
triangulations eventually becomes periodic: some later state is carried onto
an earlier one by a label-isomorphism under which all weights scale by
exactly 1/dilatation.  That window of layers is the data from which the
layered mapping-torus triangulation is assembled.

Weights are arbitrary-precision floats and shrink geometrically, so a long
pre-periodic or periodic stretch consumes precision; the sequence aborts with
``PeriodNotFound(precision_exhausted=True)`` once the weights drop below the
reliable range, and callers may retry with more bits.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mp

from .errors import DegenerateWeights, PeriodNotFound
from .surface import edge_index, flip_weight, isomorphisms

# relative gap under which edge weights count as tied for "maximal"
_TIE_EXP = 4          # tie tolerance 2^(-precision/4)
_MATCH_TOL = None     # computed per precision below
_RELIABLE_BITS = 64   # abort when fewer bits of relative accuracy remain


@dataclass(frozen=True)
class SplittingState:
    """One layer of the maximal splitting sequence."""

    triangulation: object
    weights: tuple           # mpf per edge, unnormalized (shrinking)
    layer_index: int
    flips: tuple             # edges flipped to reach this state (empty at 0)
    vertex_names: tuple      # state vertex id -> vertex id of the start state
    colors: tuple = None     # per edge: 'red' | 'blue' | None (not yet born)


@dataclass(frozen=True)
class PeriodicSplitting:
    """The detected periodic window [start, start + period)."""

    states: tuple            # states[0 .. start + period], inclusive
    start: int               # n: first layer of the periodic window
    period: int              # m: layers per period
    iso: tuple               # label-isomorphism state[n+m] -> state[n]
    vertex_map: tuple        # induced permutation of start-state vertex ids
    dilatation: object

    @property
    def window(self):
        return self.states[self.start:self.start + self.period + 1]


def _vertex_transfer(old, new, flipped):
    """Map vertex ids of ``new`` to vertex ids of ``old`` after flipping
    ``flipped``; every non-flipped edge keeps its endpoints."""
    out = {}
    for e in range(old.num_edges):
        if e == flipped:
            continue
        u0, u1 = new.edge_vertices(e)
        v0, v1 = old.edge_vertices(e)
        for u, v in [(u0, v0), (u1, v1)]:
            assert out.setdefault(u, v) == v, "inconsistent vertex transfer"
    if len(out) < new.num_vertices:
        # only possible when the flipped diagonal is the sole edge at a
        # vertex, which forces a single leftover on each side
        left_new = set(range(new.num_vertices)) - set(out)
        left_old = set(range(old.num_vertices)) - set(out.values())
        assert len(left_new) == 1 and len(left_old) == 1
        out[left_new.pop()] = left_old.pop()
    assert len(set(out.values())) == new.num_vertices
    return out


def maximal_split_step(state, tie_tol):
    """Flip all edges of maximal weight (within relative ``tie_tol``) and
    return the next :class:`SplittingState`."""
    tri = state.triangulation
    w = list(state.weights)
    wmax = max(w)
    if wmax <= 0:
        raise DegenerateWeights("maximal weight is %s" % mp.nstr(wmax, 5))
    tied = [e for e in range(tri.num_edges) if wmax - w[e] <= tie_tol * wmax]
    # maximal branches never share a switch, i.e. tied edges never share a
    # triangle; a violation means the tie tolerance swallowed a real gap
    seen = {}
    for e in tied:
        for lab in (e, ~e):
            t = tri.triangle_of(lab)
            if t in seen:
                raise DegenerateWeights(
                    "tied maximal edges %d and %d share triangle %d"
                    % (seen[t], e, t)
                )
            seen[t] = e
    names = state.vertex_names
    colors = list(state.colors or (None,) * tri.num_edges)
    for e in tied:
        quad = tri.flip_quad(e)
        a, b, c, d = (w[edge_index(x)] for x in quad)
        # the new diagonal's veering color is decided by which pair of
        # opposite square sides dominates; this is part of the track's
        # tangential structure, which (triangulation, weights) alone
        # does not determine
        if abs((a + c) - (b + d)) <= tie_tol * wmax:
            colors[e] = None
        else:
            colors[e] = "red" if a + c > b + d else "blue"
        w[e] = flip_weight((a, b, c, d), w[e], tol=tie_tol * wmax)
        new = tri.flip(e)
        transfer = _vertex_transfer(tri, new, e)
        names = tuple(names[transfer[v]] for v in range(new.num_vertices))
        tri = new
    return SplittingState(
        triangulation=tri,
        weights=tuple(w),
        layer_index=state.layer_index + 1,
        flips=tuple(tied),
        vertex_names=names,
        colors=tuple(colors),
    )


def _induced_vertex_map(src, dst, perm):
    """Permutation of vertex ids induced by a label-isomorphism."""
    out = {}
    for e in range(src.num_edges):
        img = perm[e]
        u0, u1 = src.edge_vertices(e)
        v0, v1 = dst.edge_vertices(edge_index(img))
        if img < 0:
            v0, v1 = v1, v0
        for u, v in [(u0, v0), (u1, v1)]:
            assert out.setdefault(u, v) == v, "isomorphism scrambles vertices"
    assert len(out) == src.num_vertices
    return tuple(out[v] for v in range(src.num_vertices))


def detect_periodicity(states, lam, tol, expect_vertices=None):
    """Search for the first pair (n, n+m) of states related by a
    label-isomorphism with weights scaled by exactly 1/``lam``.

    Returns (n, m, iso, vertex_map) or None.  ``vertex_map`` is the induced
    permutation in start-state vertex names; it realizes the INVERSE of the
    monodromy (the isomorphism points from the later layer back to the
    earlier one).  ``expect_vertices`` is an optional partial dict
    {vertex: image} in start-state names; candidates disagreeing with it
    are rejected.
    """
    later = states[-1]
    sig_l = sorted(later.triangulation.edge_degrees())
    for earlier in states[:-1]:
        m = later.layer_index - earlier.layer_index
        scale = lam ** -1
        # uniform scaling by 1/lam is necessary; cheap max-weight filter
        ratio = max(later.weights) / max(earlier.weights)
        if abs(ratio - scale) > tol * scale:
            continue
        if sorted(earlier.triangulation.edge_degrees()) != sig_l:
            continue
        for perm in isomorphisms(
            later.triangulation, earlier.triangulation,
            later.weights, earlier.weights, scale=scale, tol=tol,
        ):
            # the flow return map preserves veering colors; a coincidental
            # weight-preserving symmetry of the track need not, and closing
            # the mapping torus through one breaks the veering structure
            if later.colors is not None and earlier.colors is not None:
                if any(
                    later.colors[e] is not None
                    and earlier.colors[edge_index(perm[e])] is not None
                    and later.colors[e]
                    != earlier.colors[edge_index(perm[e])]
                    for e in range(later.triangulation.num_edges)
                ):
                    continue
            vmap = _induced_vertex_map(
                later.triangulation, earlier.triangulation, perm
            )
            named = tuple(
                earlier.vertex_names[vmap[v]]
                for v in range(len(vmap))
            )
            # position i of `named` is the start-state name of vertex i of
            # `later`; translate into a permutation of start-state names
            base_map = [None] * len(vmap)
            for v, name in enumerate(named):
                base_map[later.vertex_names[v]] = name
            base_map = tuple(base_map)
            if expect_vertices is not None:
                if any(base_map[v] != img
                       for v, img in expect_vertices.items()):
                    continue
            return earlier.layer_index, m, tuple(perm), base_map
    return None


def split_to_periodicity(tri, weights, lam, precision, expect_vertices=None,
                         cap=None):
    """Run the maximal splitting sequence from (``tri``, ``weights``) until
    a periodic window appears.  Returns a :class:`PeriodicSplitting`.

    ``lam`` is the word's dilatation.  ``expect_vertices`` is an optional
    partial {vertex: image} dict in ``tri``'s vertex ids constraining the
    induced vertex map of the match (which realizes the inverse monodromy);
    pass the inverse of the word's puncture action to reject isomorphisms
    arising from symmetries of the triangulation rather than the flow.
    """
    if cap is None:
        cap = 1000
    with mp.workprec(precision):
        lam = mp.mpf(lam)
        tie_tol = mp.mpf(2) ** (-(precision // _TIE_EXP))
        match_tol = mp.mpf(2) ** -40
        top = max(weights)
        state = SplittingState(
            triangulation=tri,
            weights=tuple(mp.mpf(x) / top for x in weights),
            layer_index=0,
            flips=(),
            vertex_names=tuple(range(tri.num_vertices)),
            colors=(None,) * tri.num_edges,
        )
        floor = mp.mpf(2) ** (-(precision // 2 - _RELIABLE_BITS))
        states = [state]
        for _ in range(cap):
            state = maximal_split_step(state, tie_tol)
            if max(state.weights) < floor:
                err = PeriodNotFound(
                    "weights below reliable range at layer %d "
                    "(precision %d)" % (state.layer_index, precision)
                )
                err.precision_exhausted = True
                raise err
            states.append(state)
            hit = detect_periodicity(states, lam, match_tol,
                                     expect_vertices=expect_vertices)
            if hit is not None:
                n, m, iso, vmap = hit
                return PeriodicSplitting(
                    states=tuple(states),
                    start=n,
                    period=m,
                    iso=iso,
                    vertex_map=vmap,
                    dilatation=lam,
                )
        err = PeriodNotFound("no periodic window within %d layers" % cap)
        err.precision_exhausted = False
        raise err
