"""Mapping classes as move sequences, and the generator compilers.

A mapping class is represented by a :class:`MoveSequence`: a list of
elementary moves (edge flips and relabelings) that, applied to the base
triangulation, return to it exactly.  The induced piecewise-linear action on
edge-weight vectors is precompiled: each flip stores the four side edges of
its square, so applying a move sequence to a weight vector is a flat loop of
max-plus updates and permutations.

Dehn twists are compiled by conjugating the twisting curve into *short
position* (total weight 2, crossing two edges once each), where the twist is
a single flip followed by a relabel exchanging the two crossed edges.
Half-twists are compiled from the edge joining the two punctures: the first
puncture is flipped down to degree 2, then a short search over flip sequences
supported on the twice-punctured disc finds a move admitting a closing
relabel; candidates are validated by checking that the square is the Dehn
twist about the disc's boundary.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from fractions import Fraction

from .bases import generator_library
from .errors import CompilationFailure, WordSyntaxError
from .surface import SurfaceSpec, Triangulation, edge_index, isomorphisms


class MoveSequence:
    """A compiled self-map of a base triangulation.

    ``ops`` is a flat program acting on weight vectors:
    ``('flip', e, a, b, c, d)`` replaces ``w[e]`` by
    ``max(w[a]+w[c], w[b]+w[d]) - w[e]`` (all unsigned edge indices);
    ``('perm', unsigned, signed)`` permutes coordinates by the unsigned edge
    permutation.  ``vertex_perm[v]`` is the image vertex (puncture tracking).
    """

    __slots__ = ("base", "ops", "vertex_perm")

    def __init__(self, base, ops, vertex_perm):
        self.base = base
        self.ops = tuple(ops)
        self.vertex_perm = tuple(vertex_perm)

    def __mul__(self, other):
        """Concatenation: ``self`` applied first, then ``other``."""
        assert self.base == other.base
        vp = tuple(other.vertex_perm[v] for v in self.vertex_perm)
        return MoveSequence(self.base, self.ops + other.ops, vp)

    def inverse(self):
        ops = []
        for op in reversed(self.ops):
            if op[0] == "flip":
                ops.append(op)
            else:
                _, unsigned, signed = op
                inv_signed = [None] * len(signed)
                inv_unsigned = [None] * len(unsigned)
                for e, img in enumerate(signed):
                    if img >= 0:
                        inv_signed[img] = e
                        inv_unsigned[img] = e
                    else:
                        inv_signed[~img] = ~e
                        inv_unsigned[~img] = e
                ops.append(("perm", tuple(inv_unsigned), tuple(inv_signed)))
        vp = [None] * len(self.vertex_perm)
        for v, img in enumerate(self.vertex_perm):
            vp[img] = v
        return MoveSequence(self.base, ops, vp)

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        out = identity_map(self.base)
        for _ in range(k):
            out = out * self
        return out

    def __call__(self, weights):
        """Apply to a weight vector (any numeric type supporting + and max)."""
        w = list(weights)
        for op in self.ops:
            if op[0] == "flip":
                _, e, a, b, c, d = op
                w[e] = max(w[a] + w[c], w[b] + w[d]) - w[e]
            else:
                unsigned = op[1]
                new = [None] * len(w)
                for e, img in enumerate(unsigned):
                    new[img] = w[e]
                w = new
        return w

    def __len__(self):
        return len(self.ops)


def identity_map(base):
    return MoveSequence(base, (), tuple(range(base.num_vertices)))


def _sign_fix(tri, base):
    """Relabel (identity on unsigned edges, possibly reversing directions)
    taking ``tri`` to ``base``, or None.  Flipping an edge twice restores the
    square but reverses the diagonal's intrinsic direction, so conjugated
    moves close up only after such a relabel."""
    for perm in isomorphisms(tri, base):
        if all(edge_index(lab) == e for e, lab in enumerate(perm)):
            return perm
    return None


def compile_moves(base, moves, vertex_perm=None):
    """Simulate ``moves`` (a list of ``('flip', e)`` / ``('perm', signed)``)
    on the base triangulation, precompute flip squares, and check the
    sequence returns to the base exactly.  A pure direction-reversing
    closing relabel is appended automatically if needed."""
    tri = base
    ops = []
    for mv in moves:
        if mv[0] == "flip":
            e = mv[1]
            a, b, c, d = tri.flip_quad(e)
            ops.append(
                ("flip", e, edge_index(a), edge_index(b), edge_index(c), edge_index(d))
            )
            tri = tri.flip(e)
        elif mv[0] == "perm":
            signed = tuple(mv[1])
            unsigned = tuple(edge_index(s) for s in signed)
            ops.append(("perm", unsigned, signed))
            tri = tri.relabel(signed)
        else:
            raise ValueError("unknown move %r" % (mv,))
    if tri != base:
        fix = _sign_fix(tri, base)
        if fix is None:
            raise CompilationFailure("move sequence does not return to the base")
        unsigned = tuple(edge_index(s) for s in fix)
        ops.append(("perm", unsigned, tuple(fix)))
        tri = tri.relabel(fix)
        assert tri == base
    if vertex_perm is None:
        vertex_perm = tuple(range(base.num_vertices))
    return MoveSequence(base, ops, vertex_perm)


# ---------------------------------------------------------------------------
# Dehn twist compilation
# ---------------------------------------------------------------------------


def _apply_flip_to_weights(tri, w, e):
    a, b, c, d = tri.flip_quad(e)
    w = list(w)
    i = lambda s: edge_index(s)
    w[e] = max(w[i(a)] + w[i(c)], w[i(b)] + w[i(d)]) - w[e]
    return w


def _shorten_curve(base, curve, cap=20000):
    """Flip the triangulation until ``curve`` has total weight 2.

    Exact arithmetic (the library curves have integer weights).  Greedy
    weight-reducing flips, with a breadth-first search across weight plateaus
    when the greedy step stalls.  Returns the list of flipped edges.
    """
    curve = [Fraction(x) for x in curve]

    def reducing_flip(tri, w):
        best = None
        for e in range(tri.num_edges):
            try:
                a, b, c, d = tri.flip_quad(e)
            except Exception:
                continue
            i = edge_index
            new = max(w[i(a)] + w[i(c)], w[i(b)] + w[i(d)]) - w[e]
            delta = new - w[e]
            if delta < 0 and (best is None or delta < best[0]):
                best = (delta, e)
        return None if best is None else best[1]

    path = []
    tri, w = base, curve
    expansions = 0
    while sum(w) > 2:
        e = reducing_flip(tri, w)
        if e is not None:
            path.append(e)
            w = _apply_flip_to_weights(tri, w, e)
            tri = tri.flip(e)
            continue
        # plateau search: breadth-first over weight-preserving flips
        start_key = (tri.canonical(), tuple(w))
        seen = {start_key}
        queue = [(tri, w, [])]
        found = None
        while queue and found is None:
            cur_tri, cur_w, cur_path = queue.pop(0)
            for e in range(cur_tri.num_edges):
                try:
                    a, b, c, d = cur_tri.flip_quad(e)
                except Exception:
                    continue
                i = edge_index
                new = max(cur_w[i(a)] + cur_w[i(c)], cur_w[i(b)] + cur_w[i(d)]) - cur_w[e]
                if new > cur_w[e]:
                    continue
                nw = list(cur_w)
                nw[e] = new
                nt = cur_tri.flip(e)
                key = (nt.canonical(), tuple(nw))
                if key in seen:
                    continue
                seen.add(key)
                expansions += 1
                if expansions > cap:
                    raise CompilationFailure("curve shortening exceeded its cap")
                npath = cur_path + [e]
                if new < cur_w[e] or reducing_flip(nt, nw) is not None:
                    found = (nt, nw, npath)
                    break
                queue.append((nt, nw, npath))
        if found is None:
            raise CompilationFailure("curve cannot be shortened to weight 2")
        tri, w, more = found
        path.extend(more)
    if sorted(x for x in w if x) != [1, 1]:
        raise CompilationFailure("short position is not two weight-1 edges")
    x, y = [e for e in range(len(w)) if w[e]]
    return path, tri, (x, y)


def _short_twist_moves(tri, x, y):
    """The canned twist in short position: flip one crossed edge, then the
    relabel exchanging the two crossed edges.

    The flipped edge is the one whose positive side is followed (counter-
    clockwise) by a side of the other crossed edge; ties broken by lower
    label.  The closing relabel is found by isomorphism search restricted to
    maps fixing every other edge.
    """
    candidates = []
    for u, v in ((x, y), (y, x)):
        t, i = tri.side(u)
        nxt = tri.triangles[t][(i + 1) % 3]
        if edge_index(nxt) == v:
            candidates.append(u)
    if not candidates:
        raise CompilationFailure("short position squares are malformed")
    u = min(candidates)
    v = y if u == x else x
    flipped = tri.flip(u)
    for perm in isomorphisms(flipped, tri):
        if all(edge_index(perm[e]) == e for e in range(tri.num_edges)
               if e not in (u, v)):
            if edge_index(perm[u]) == v and edge_index(perm[v]) == u:
                return [("flip", u), ("perm", tuple(perm))]
    raise CompilationFailure("no closing relabel for short twist")


def compile_twist(base, curve):
    """MoveSequence of the Dehn twist about a curve given by its weight
    vector on ``base``."""
    path, tri, (x, y) = _shorten_curve(base, curve)
    moves = [("flip", e) for e in path]
    moves += _short_twist_moves(tri, x, y)
    # undo the conjugating flips (a flip is an involution)
    moves += [("flip", e) for e in reversed(path)]
    return compile_moves(base, moves)


# ---------------------------------------------------------------------------
# Half-twist compilation
# ---------------------------------------------------------------------------


def _maps_agree(f, g, laminations):
    return all(f(list(w)) == g(list(w)) for w in laminations)


def _translates_along(seq, direction, laminations, powers=16):
    """True iff iterating ``seq`` on each test lamination eventually
    translates by a constant nonnegative multiple of ``direction`` (the
    characteristic behavior of a twist about the curve ``direction``), with
    a strictly positive multiple for at least one test."""
    some_positive = False
    for w in laminations:
        prev = [Fraction(x) for x in w]
        diffs = []
        for _ in range(powers):
            nxt = seq(prev)
            diffs.append([a - b for a, b in zip(nxt, prev)])
            prev = nxt
        last = diffs[-1]
        if diffs[-2] != last or diffs[-3] != last:
            return False
        c = None
        for e, b in enumerate(direction):
            if b:
                c = Fraction(last[e], b)
                break
        if c is None or c < 0:
            return False
        if any(last[e] != c * b for e, b in enumerate(direction)):
            return False
        if c > 0:
            some_positive = True
    return some_positive


def compile_half_twist(base, arc, pair_vertices, boundary, test_laminations,
                       boundary_twist=None, must_fix=(), max_depth=6,
                       cap=20000):
    """MoveSequence of the half-twist about the embedded arc ``arc`` (an edge
    of ``base``) joining two distinct punctures, transposing them.

    The first puncture is flipped down to degree 2, then a breadth-first
    search over flip sequences supported on the twice-punctured disc looks
    for a sequence admitting a closing relabel (identity outside the disc).
    A candidate is accepted only if its action fixes the disc's boundary
    curve ``boundary`` and its square is the Dehn twist about it: compared
    against ``boundary_twist`` exactly when given, otherwise by checking the
    twist's characteristic translation on the test laminations.  If the
    candidate squares to the inverse boundary twist it is inverted, so the
    half-twist handedness always matches the twist compiler's.
    """
    vx, vy = pair_vertices
    tri = base
    path = []
    while tri.vertex_degree(vx) > 2:
        done = False
        for e in range(tri.num_edges):
            if e == arc:
                continue
            u, v = tri.edge_vertices(e)
            if vx not in (u, v):
                continue
            try:
                tri2 = tri.flip(e)
            except Exception:
                continue
            if tri2.vertex_degree(vx) < tri.vertex_degree(vx):
                path.append(e)
                tri = tri2
                done = True
                break
        if not done:
            raise CompilationFailure("cannot reduce puncture degree")
    # boundary weights in the reduced coordinates give the disc's support;
    # flips keep their labels, so the support set is invariant.
    wb = [Fraction(x) for x in boundary]
    cur = base
    for e in path:
        wb = _apply_flip_to_weights(cur, wb, e)
        cur = cur.flip(e)
    support = {e for e in range(base.num_edges) if wb[e]} | {arc}

    vperm = list(range(base.num_vertices))
    vperm[vx], vperm[vy] = vy, vx
    vperm = tuple(vperm)
    bnd = list(map(Fraction, boundary))

    def candidate(flips, perm):
        moves = [("flip", e) for e in path]
        moves += [("flip", e) for e in flips]
        moves += [("perm", tuple(perm))]
        moves += [("flip", e) for e in reversed(path)]
        return compile_moves(base, moves, vperm)

    queue = [(tri, ())]
    seen = {tri.canonical(): 0}
    expansions = 0
    while queue:
        state, flips = queue.pop(0)
        if flips:
            for perm in isomorphisms(state, tri):
                if any(perm[e] != e for e in range(base.num_edges)
                       if e not in support):
                    continue
                try:
                    q = candidate(flips, perm)
                except CompilationFailure:
                    continue
                if q(bnd) != bnd:
                    continue
                if any(q(list(map(Fraction, v))) != list(map(Fraction, v))
                       for v in must_fix):
                    continue
                sq = q * q
                if boundary_twist is not None:
                    if _maps_agree(sq, boundary_twist, test_laminations):
                        return q
                    if _maps_agree(sq, boundary_twist.inverse(),
                                   test_laminations):
                        return q.inverse()
                else:
                    if _translates_along(sq, boundary, test_laminations):
                        return q
        if len(flips) < max_depth:
            for e in sorted(support):
                try:
                    nxt = state.flip(e)
                except Exception:
                    continue
                key = nxt.canonical()
                if seen.get(key, max_depth + 1) <= len(flips) + 1:
                    continue
                seen[key] = len(flips) + 1
                expansions += 1
                if expansions > cap:
                    raise CompilationFailure("half-twist search exceeded cap")
                queue.append((nxt, flips + (e,)))
    raise CompilationFailure("no half-twist move sequence found")


# ---------------------------------------------------------------------------
# Words
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"^([a-z]+\d+)(!?)(?:\^(\d+))?$")
_GROUP_RE = re.compile(r"\(([^()]*)\)(!?)(?:\^(\d+))?")


@dataclass(frozen=True)
class MappingClassWord:
    """A word in named generators: tokens of (name, exponent)."""

    surface: SurfaceSpec
    tokens: tuple  # of (generator name, nonzero int exponent)
    pure_only: bool = False

    def __str__(self):
        parts = []
        for name, k in self.tokens:
            s = name
            if k < 0:
                s += "!"
            if abs(k) != 1:
                s += "^%d" % abs(k)
            parts.append(s)
        return ".".join(parts)

    @property
    def length(self):
        return sum(abs(k) for _, k in self.tokens)


def parse_word(surface, text, pure_only=False):
    """Parse the dot-separated word syntax: ``!`` marks an inverse and ``^k``
    a power; parenthesized groups are expanded, e.g. ``(a0.b0!)^12.p0``."""
    text = text.strip()
    if text in ("", "1", "id"):
        return MappingClassWord(surface, (), pure_only)

    def expand(match):
        inner, bang, power = match.group(1), match.group(2), match.group(3)
        k = int(power) if power else 1
        toks = inner.split(".")
        if bang:
            toks = [t[:-1] if t.endswith("!") else t + "!" for t in reversed(toks)]
        return ".".join(toks * k)

    prev = None
    while prev != text:
        prev = text
        text = _GROUP_RE.sub(expand, text)
    if "(" in text or ")" in text:
        raise WordSyntaxError("unbalanced parentheses in %r" % text)
    tokens = []
    for part in text.split("."):
        m = _TOKEN_RE.match(part)
        if not m:
            raise WordSyntaxError("bad token %r" % part)
        name, bang, power = m.groups()
        k = int(power) if power else 1
        if k == 0:
            raise WordSyntaxError("zero exponent in %r" % part)
        tokens.append((name, -k if bang else k))
    return MappingClassWord(surface, tuple(tokens), pure_only)


class WordCompiler:
    """Compiles words on one surface; generator move sequences are built
    once and cached."""

    def __init__(self, spec: SurfaceSpec):
        self.spec = spec
        self.library = generator_library(spec)
        self.base = self.library.triangulation
        self._gens = {}
        self._half_twist_context = None

    def _half_twist_tools(self):
        """Seed curves, mixing twists and test laminations used to validate
        half-twist candidates."""
        if self._half_twist_context is None:
            lib = self.library
            seeds = [tuple(map(Fraction, w)) for w in lib.twists.values()]
            seeds += [tuple(map(Fraction, b)) for _, _, b in
                      lib.half_twists.values()]
            mixers = []
            compiled_boundaries = {}
            for w in lib.twists.values():
                mixers.append(compile_twist(self.base, w))
            for name, (_, _, b) in lib.half_twists.items():
                try:
                    compiled_boundaries[name] = compile_twist(self.base, b)
                    mixers.append(compiled_boundaries[name])
                except CompilationFailure:
                    compiled_boundaries[name] = None
            rnd = random.Random(7)
            maps = mixers + [m.inverse() for m in mixers]
            lams = list(seeds)
            for _ in range(25):
                w = list(rnd.choice(seeds))
                for _ in range(rnd.randint(1, 6)):
                    w = rnd.choice(maps)(w)
                lams.append(w)
            self._half_twist_context = (lams, compiled_boundaries)
        return self._half_twist_context

    def generator(self, name) -> MoveSequence:
        if name not in self._gens:
            lib = self.library
            if name in lib.twists:
                seq = compile_twist(self.base, lib.twists[name])
            elif name in lib.half_twists:
                arc, (i, j), boundary = lib.half_twists[name]
                u, v = self.base.edge_vertices(arc)
                lams, boundary_twists = self._half_twist_tools()
                seq = compile_half_twist(
                    self.base, arc, (u, v), boundary, lams,
                    boundary_twist=boundary_twists[name],
                    must_fix=lib.half_fixed.get(name, ()),
                )
            else:
                raise WordSyntaxError(
                    "unknown generator %r for %s" % (name, self.spec)
                )
            self._gens[name] = seq
        return self._gens[name]

    def compile(self, word: MappingClassWord) -> MoveSequence:
        if word.pure_only and any(
            name in self.library.half_twists for name, _ in word.tokens
        ):
            raise WordSyntaxError("pure word contains a half-twist token")
        out = identity_map(self.base)
        for name, k in word.tokens:
            out = out * (self.generator(name) ** k)
        return out


def compile_word(word: MappingClassWord) -> MoveSequence:
    return WordCompiler(word.surface).compile(word)


def puncture_permutation(word: MappingClassWord, compiler: WordCompiler = None):
    """The induced permutation of the punctures and its cycle-type partition
    (sorted decreasing, summing to n)."""
    compiler = compiler or WordCompiler(word.surface)
    seq = compiler.compile(word)
    lib = compiler.library
    # express the vertex permutation in puncture indexing
    vert_to_punc = {v: i for i, v in enumerate(lib.punctures)}
    n = word.surface.punctures
    perm = tuple(
        vert_to_punc[seq.vertex_perm[lib.punctures[i]]] for i in range(n)
    )
    seen = [False] * n
    partition = []
    for i in range(n):
        if not seen[i]:
            ln = 0
            j = i
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                ln += 1
            partition.append(ln)
    return perm, tuple(sorted(partition, reverse=True))
