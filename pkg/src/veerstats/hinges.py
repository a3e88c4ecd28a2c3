"""Hinge statistics and monochromatic non-hinge chains.

A tetrahedron is a hinge when its two pi-edges carry different colors.
Non-hinges are tagged red or blue by the majority color over their six
edges; since the four 0-angle edges always split two red / two blue, the
tag agrees with the shared color of the pi-edges.

Chains are maximal runs of consecutively ordered, same-tag non-hinges in
the (cyclic) total order, refined into face-connected components.  The
total order is the deterministic layered order fixed by the builder; chain
lengths are sensitive to the arbitrary ordering of simultaneous flips
within a layer, so a resampling diagnostic is exposed rather than hidden.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .geometry import V3


@dataclass(frozen=True)
class HingeReport:
    tags: tuple              # per tet: 'hinge' | 'red' | 'blue'
    num_tets: int
    num_hinges: int
    hinge_density: float
    max_chain: int
    chains: tuple            # (start index in total order, length, color)
    multiple_split_flag: bool


def _tet_tag(tv, t):
    if tv.is_hinge(t):
        return "hinge"
    colors = [tv.edge_colors[e] for e in tv.tetrahedra[t].edge_classes]
    reds = colors.count("red")
    tag = "red" if reds > len(colors) - reds else "blue"
    # the equatorial square contributes two of each, so the pi-edges decide
    assert tag == tv.edge_colors[tv.tetrahedra[t].edge_classes[0]]
    return tag


def _face_adjacent(tv, a, b):
    return any(g[0] == b for g in tv.tetrahedra[a].gluings)


def _chains_for_order(tv, order, tags):
    """Maximal face-connected monochromatic non-hinge chains along the
    cyclic ``order``; returns a list of (start position, length, color)."""
    n = len(order)
    chains = []
    pos = 0
    # rotate to a run boundary so the cyclic wraparound joins correctly
    def same_run(i, j):
        ti, tj = tags[order[i % n]], tags[order[j % n]]
        return ti != "hinge" and ti == tj
    start = 0
    if all(same_run(i, i + 1) for i in range(n)):
        runs = [list(range(n))] if tags[order[0]] != "hinge" else []
    else:
        while same_run(start - 1, start):
            start += 1
        runs, cur = [], []
        for k in range(n):
            i = (start + k) % n
            if tags[order[i]] == "hinge":
                if cur:
                    runs.append(cur)
                cur = []
            elif cur and not same_run(cur[-1], i):
                runs.append(cur)
                cur = [i]
            else:
                cur.append(i)
        if cur:
            runs.append(cur)
    for run in runs:
        # refine into face-connected components of consecutive members
        comp = [run[0]]
        for i in run[1:]:
            if any(_face_adjacent(tv, order[i], order[j]) for j in comp):
                comp.append(i)
            else:
                chains.append(comp)
                comp = [i]
        chains.append(comp)
    return [
        (c[0], len(c), tags[order[c[0]]]) for c in chains
    ]


def classify_hinges(tv):
    tags = tuple(_tet_tag(tv, t) for t in range(tv.num_tetrahedra))
    hinges = sum(1 for x in tags if x == "hinge")
    chains = tuple(_chains_for_order(tv, tv.total_order, tags))
    multiple = any(len(ids) > 1 for _, ids in tv.layers)
    return HingeReport(
        tags=tags,
        num_tets=tv.num_tetrahedra,
        num_hinges=hinges,
        hinge_density=hinges / tv.num_tetrahedra,
        max_chain=max((l for _, l, _ in chains), default=0),
        chains=chains,
        multiple_split_flag=multiple,
    )


def maximal_nonhinge_chain(tv, report):
    return report.max_chain, list(report.chains)


def chain_order_sensitivity(tv, report, samples=20, seed=0):
    """Spread of |M_ch| under random reorderings of the simultaneous flips
    within each layer (the only arbitrary choice in the total order)."""
    rng = random.Random(seed)
    by_layer = [list(ids) for _, ids in tv.layers]
    lo = hi = report.max_chain
    for _ in range(samples):
        order = []
        for ids in by_layer:
            ids = ids[:]
            rng.shuffle(ids)
            order.extend(ids)
        chains = _chains_for_order(tv, tuple(order), report.tags)
        m = max((l for _, l, _ in chains), default=0)
        lo, hi = min(lo, m), max(hi, m)
    return lo, hi


def abfmt_bound(fiber):
    """Upper bound for volume per hinge: v3 * (4|chi| + 1) for the fiber."""
    chi = 2 - 2 * fiber.genus - fiber.punctures
    return V3 * (4 * abs(chi) + 1)
