"""Seeded word sampling, full-pipeline runs, campaigns, and aggregation.

Every sampled word is a pure function of (master seed, job index), so a
campaign is reproducible as a multiset of records no matter how jobs are
scheduled.  Pipeline failures become error records tagged with the failing
stage rather than exceptions; proved inequalities (the volume-per-hinge
bound) are the exception and abort loudly, since a violation means a bug.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from mpmath import mp

from .errors import (
    BoundViolation,
    DegenerateWeights,
    PeriodNotFound,
    SchemaMismatch,
    UnsupportedSurface,
    VeerstatsError,
)
from .geometry import build_gluing_system, solve_shapes
from .hinges import abfmt_bound, classify_hinges
from .mtorus import assemble_mapping_torus, assign_veering_colors
from .pa import invariant_lamination
from .splitting import split_to_periodicity
from .stratum import puncture_stratum
from .surface import SurfaceSpec
from .words import MappingClassWord, WordCompiler, puncture_permutation

SCHEMA_VERSION = 1
PRECISION_ENV = "VEERSTATS_PRECISION"
DEFAULT_PRECISION = 212
MAX_PRECISION = 6784

MODES = ("simple", "pure", "power_head", "power_all")


def default_precision():
    return int(os.environ.get(PRECISION_ENV, DEFAULT_PRECISION))


@dataclass(frozen=True)
class WalkSpec:
    """A family of random words: surface, target length, sampling mode."""

    surface: SurfaceSpec
    target_length: int
    mode: str = "simple"
    seed: int = 0
    count: int = 1
    power_range: tuple = (2, 20)

    def __post_init__(self):
        assert self.mode in MODES, "unknown sampling mode %r" % self.mode
        assert self.target_length >= 4


def _job_rng(seed, index):
    digest = hashlib.sha256(b"%d:%d" % (seed, index)).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


_compiler_cache = {}


def _compiler(spec):
    if spec not in _compiler_cache:
        _compiler_cache[spec] = WordCompiler(spec)
    return _compiler_cache[spec]


def sample_word(walk: WalkSpec, index) -> MappingClassWord:
    """Deterministic sample: uniform letters with the documented length
    jitter (uniform on {L-3, ..., L+2}), or the power-word variants."""
    rng = _job_rng(walk.seed, index)
    lib = _compiler(walk.surface).library
    pure = walk.mode == "pure"
    names = lib.names(pure_only=pure)
    if not names:
        raise UnsupportedSurface(
            "no %s generators on %s" % (walk.mode, walk.surface)
        )
    length = walk.target_length - 3 + rng.randrange(6)
    tokens = []
    total = 0
    if walk.mode in ("simple", "pure"):
        while total < length:
            tokens.append((rng.choice(names), rng.choice((1, -1))))
            total += 1
    elif walk.mode == "power_head":
        k = min(rng.randint(*walk.power_range), length - 1)
        tokens.append((rng.choice(names), rng.choice((1, -1)) * k))
        total = k
        while total < length:
            tokens.append((rng.choice(names), rng.choice((1, -1))))
            total += 1
    else:  # power_all
        while total < length:
            k = min(rng.randint(*walk.power_range), length - total)
            tokens.append((rng.choice(names), rng.choice((1, -1)) * k))
            total += k
    return MappingClassWord(walk.surface, tuple(tokens), pure_only=pure)


def _cycle_type(sigma):
    seen, parts = set(), []
    for i in range(len(sigma)):
        if i in seen:
            continue
        n, j = 0, i
        while j not in seen:
            seen.add(j)
            j = sigma[j]
            n += 1
        parts.append(n)
    return sorted(parts, reverse=True)


def run_pipeline(word: MappingClassWord, precision=None, seed=None,
                 store_shapes=False, split_cap=None, solver_restarts=None,
                 solver_iters=None):
    """Run the full chain on one word and return an ExperimentRecord dict.

    Stage failures yield an error record (status='error', stage=...); a
    violated volume-per-hinge bound raises BoundViolation instead, since
    the inequality is a theorem.  Precision is doubled and the splitting
    retried while it reports exhaustion.
    """
    record = {
        "schema_version": SCHEMA_VERSION,
        "status": "ok",
        "surface": str(word.surface),
        "word": str(word),
        "word_length": word.length,
        "seed": seed,
    }
    times = {}
    if split_cap is None:
        split_cap = 1000 * max(word.length, 1)
    precision = precision or default_precision()
    stage = "compile"
    try:
        t0 = time.perf_counter()
        comp = _compiler(word.surface)
        moves = comp.compile(word)
        sigma, _ = puncture_permutation(word, comp)
        times["compile"] = time.perf_counter() - t0

        while True:
            stage = "lamination"
            t0 = time.perf_counter()
            lam = invariant_lamination(moves, precision=precision)
            times["lamination"] = time.perf_counter() - t0

            stage = "stratum"
            t0 = time.perf_counter()
            with mp.workprec(precision):
                strat = puncture_stratum(
                    word.surface, comp.base, lam.stable_weights,
                    punctures=comp.library.punctures,
                )
            times["stratum"] = time.perf_counter() - t0

            stage = "splitting"
            t0 = time.perf_counter()
            try:
                with mp.workprec(precision):
                    vop = strat.vertex_of_puncture
                    inv = [0] * len(sigma)
                    for i, j in enumerate(sigma):
                        inv[j] = i
                    expect = {vop[i]: vop[inv[i]] for i in range(len(sigma))}
                    splitting = split_to_periodicity(
                        strat.triangulation, strat.weights, lam.dilatation,
                        precision, expect_vertices=expect, cap=split_cap,
                    )
            except PeriodNotFound as err:
                if err.precision_exhausted and precision < MAX_PRECISION:
                    precision *= 2
                    continue
                raise
            except DegenerateWeights:
                # a tie among maximal weights that swallows a real gap is
                # resolved by a finer tie tolerance, i.e. more bits
                if precision < MAX_PRECISION:
                    precision *= 2
                    continue
                raise
            times["splitting"] = time.perf_counter() - t0
            break

        stage = "assembly"
        t0 = time.perf_counter()
        tv = assign_veering_colors(
            assemble_mapping_torus(splitting, strat.surface,
                                   monodromy=str(word))
        )
        times["assembly"] = time.perf_counter() - t0

        stage = "solve"
        t0 = time.perf_counter()
        system = build_gluing_system(tv)
        hinge_flags = [tv.is_hinge(t) for t in range(tv.num_tetrahedra)]
        solve_kwargs = {}
        if solver_restarts is not None:
            solve_kwargs["max_restarts"] = solver_restarts
        if solver_iters is not None:
            solve_kwargs["newton_iters"] = solver_iters
        sa = solve_shapes(system, precision=precision,
                          hinge_flags=hinge_flags, **solve_kwargs)
        times["solve"] = time.perf_counter() - t0

        stage = "analyze"
        t0 = time.perf_counter()
        report = classify_hinges(tv)
        times["analyze"] = time.perf_counter() - t0
    except VeerstatsError as err:
        record.update(
            status="error",
            stage=stage,
            error=type(err).__name__,
            message=str(err)[:200],
            wall_time_ms={k: round(v * 1000, 3) for k, v in times.items()},
        )
        return record

    vol = float(sa.volume)
    vph = vol / report.num_hinges if report.num_hinges else None
    bound = float(abfmt_bound(tv.fiber))
    if vph is not None and vph > bound + 1e-9:
        raise BoundViolation(
            "volume per hinge %.6f exceeds %.6f on %s"
            % (vph, bound, str(word))
        )
    record.update({
        "partition": _cycle_type(sigma),
        "fiber": str(tv.fiber),
        "fiber_genus": tv.fiber.genus,
        "fiber_punctures": tv.fiber.punctures,
        "num_tets": tv.num_tetrahedra,
        "num_hinges": report.num_hinges,
        "hinge_density": report.hinge_density,
        "max_chain": report.max_chain,
        "multiple_split_flag": report.multiple_split_flag,
        "volume": vol,
        "vol_per_hinge": vph,
        "geometric": sa.geometric,
        "min_im": float(sa.min_im),
        "residual": sa.residual,
        "log_dilatation": float(lam.log_dilatation),
        "preperiod": splitting.start,
        "period": splitting.period,
        "precision": precision,
        "wall_time_ms": {k: round(v * 1000, 3) for k, v in times.items()},
    })
    if store_shapes:
        record["shapes"] = [
            [float(mp.re(z)), float(mp.im(z))] for z in sa.normalized_shapes
        ]
        # raw per-tetrahedron shapes in the solver's edge-pair convention,
        # as needed to re-evaluate the gluing equations directly
        record["raw_shapes"] = [
            [float(mp.re(z)), float(mp.im(z))] for z in sa.shapes
        ]
    return record


def _campaign_job(args):
    walk, index, precision, store_shapes, solver_restarts, solver_iters = args
    word = sample_word(walk, index)
    rec = run_pipeline(word, precision=precision, seed=walk.seed,
                       store_shapes=store_shapes,
                       solver_restarts=solver_restarts,
                       solver_iters=solver_iters)
    rec["index"] = index
    return rec


@dataclass
class CampaignSummary:
    count: int
    ok: int
    failures_by_stage: dict
    mean_hinge_density: float
    mean_vol_per_hinge: float
    fraction_geometric: float


def summarize(records):
    ok = [r for r in records if r["status"] == "ok"]
    fails = {}
    for r in records:
        if r["status"] != "ok":
            fails[r["stage"]] = fails.get(r["stage"], 0) + 1
    def mean(key):
        vals = [r[key] for r in ok if r.get(key) is not None]
        return sum(vals) / len(vals) if vals else float("nan")
    geo = [r["geometric"] for r in ok]
    return CampaignSummary(
        count=len(records),
        ok=len(ok),
        failures_by_stage=fails,
        mean_hinge_density=mean("hinge_density"),
        mean_vol_per_hinge=mean("vol_per_hinge"),
        fraction_geometric=sum(geo) / len(geo) if geo else float("nan"),
    )


def run_campaign(walk: WalkSpec, out_path=None, precision=None,
                 store_shapes=False, workers=None, solver_restarts=None,
                 solver_iters=None):
    """Execute ``walk.count`` jobs and return (records, CampaignSummary);
    records are appended to ``out_path`` as JSONL in completion order."""
    jobs = [(walk, i, precision, store_shapes, solver_restarts, solver_iters)
            for i in range(walk.count)]
    sink = open(out_path, "a", encoding="utf-8") if out_path else None
    records = []
    try:
        if workers is None:
            workers = min(os.cpu_count() or 1, walk.count)
        if workers > 1:
            # warm the compiler cache before forking so children inherit it
            _compiler(walk.surface)
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = pool.map(_campaign_job, jobs, chunksize=1)
                for rec in results:
                    records.append(rec)
                    if sink:
                        sink.write(json.dumps(rec) + "\n")
                        sink.flush()
        else:
            for job in jobs:
                rec = _campaign_job(job)
                records.append(rec)
                if sink:
                    sink.write(json.dumps(rec) + "\n")
                    sink.flush()
    finally:
        if sink:
            sink.close()
    return records, summarize(records)


def load_records(path):
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------

_REGULAR = complex(0.5, 3 ** 0.5 / 2)


def _check_schema(records):
    for r in records:
        if r.get("schema_version") != SCHEMA_VERSION:
            raise SchemaMismatch(
                "record schema %r, expected %r"
                % (r.get("schema_version"), SCHEMA_VERSION)
            )


def _hex_bin(x, y, size):
    """Axial coordinates of the pointy-top hexagon of circumradius ``size``
    containing (x, y), by cube rounding."""
    q = (math.sqrt(3) / 3 * x - y / 3) / size
    r = (2 * y / 3) / size
    xq, yr, zs = q, r, -q - r
    rq, rr, rs = round(xq), round(yr), round(zs)
    dq, dr, ds = abs(rq - xq), abs(rr - yr), abs(rs - zs)
    if dq > dr and dq > ds:
        rq = -rr - rs
    elif dr > ds:
        rr = -rq - rs
    return int(rq), int(rr)


def _hex_center(q, r, size):
    x = size * math.sqrt(3) * (q + r / 2)
    y = size * 1.5 * r
    return x, y


def aggregate_stats(records, kind, bin_size=0.02):
    """Build one statistic table (header row + data rows) from records.

    Error records are excluded from every aggregate except the failure
    table itself.
    """
    _check_schema(records)
    ok = [r for r in records if r["status"] == "ok"]

    if kind == "geometric":
        buckets = {}
        for r in ok:
            b = (r["word_length"] // 50) * 50
            n_all, n_geo = buckets.get(b, (0, 0))
            buckets[b] = (n_all + 1, n_geo + (1 if r["geometric"] else 0))
        rows = [
            (b, n_geo / n_all, n_all)
            for b, (n_all, n_geo) in sorted(buckets.items())
        ]
        return ("length_bucket", "fraction_geometric", "count"), rows

    if kind == "hinge_density":
        groups = {}
        for r in ok:
            groups.setdefault(r["surface"], []).append(r["hinge_density"])
        rows = [
            (s, sum(v) / len(v), len(v)) for s, v in sorted(groups.items())
        ]
        return ("surface", "mean_hinge_density", "count"), rows

    if kind == "shapes_hex":
        bins = {}
        for r in ok:
            hinge_frac = r["hinge_density"]
            for x, y in r.get("shapes", ()):
                key = _hex_bin(x, y, bin_size)
                h, nh = bins.get(key, (0.0, 0.0))
                bins[key] = (h + hinge_frac, nh + (1 - hinge_frac))
        rows = []
        for (q, r_), (h, nh) in sorted(bins.items()):
            x, y = _hex_center(q, r_, bin_size)
            rows.append((round(x, 6), round(y, 6), h, nh, h + nh))
        return ("x", "y", "hinge_weight", "nonhinge_weight", "total"), rows

    if kind == "volume_scatter":
        rows = [
            (r["num_tets"], r["num_hinges"], r["volume"]) for r in ok
        ]
        def slope(xs, ys):
            n = len(xs)
            if n < 2:
                return float("nan")
            mx, my = sum(xs) / n, sum(ys) / n
            den = sum((x - mx) ** 2 for x in xs)
            return sum((x - mx) * (y - my)
                       for x, y in zip(xs, ys)) / den if den else float("nan")
        s_t = slope([r[0] for r in rows], [r[2] for r in rows])
        s_h = slope([r[1] for r in rows], [r[2] for r in rows])
        out = [(t, h, v, s_t, s_h) for t, h, v in rows]
        return ("num_tets", "num_hinges", "volume",
                "slope_vs_tets", "slope_vs_hinges"), out

    if kind == "vol_per_hinge_hist":
        vals = [r["vol_per_hinge"] for r in ok
                if r["vol_per_hinge"] is not None]
        if not vals:
            return ("bin_left", "bin_right", "count", "expected_value"), []
        width = 0.05
        bins = {}
        for v in vals:
            b = math.floor(v / width)
            bins[b] = bins.get(b, 0) + 1
        expected = sum(vals) / len(vals)
        rows = [
            (b * width, (b + 1) * width, c, expected)
            for b, c in sorted(bins.items())
        ]
        return ("bin_left", "bin_right", "count", "expected_value"), rows

    if kind == "suffix_range":
        pts = sorted(
            (r["word_length"], r["vol_per_hinge"]) for r in ok
            if r["vol_per_hinge"] is not None
        )
        rows = []
        for i, (L, _) in enumerate(pts):
            tail = [v for _, v in pts[i:]]
            rows.append((L, min(tail), max(tail), len(tail)))
        return ("min_length", "min_vol_per_hinge", "max_vol_per_hinge",
                "count"), rows

    if kind == "dilatation":
        rows = [
            (r["log_dilatation"], r["volume"], r["num_tets"], r["surface"])
            for r in ok
        ]
        return ("log_dilatation", "volume", "num_tets", "surface"), rows

    if kind == "partition":
        groups = {}
        for r in ok:
            key = ",".join(map(str, r["partition"]))
            groups[key] = groups.get(key, 0) + 1
        total = sum(groups.values())
        rows = [
            (k, c, c / total) for k, c in sorted(groups.items())
        ]
        return ("partition", "count", "proportion"), rows

    if kind == "failures":
        groups = {}
        for r in records:
            if r["status"] != "ok":
                key = (r["stage"], r["error"])
                groups[key] = groups.get(key, 0) + 1
        rows = [(s, e, c) for (s, e), c in sorted(groups.items())]
        return ("stage", "error", "count"), rows

    raise ValueError("unknown statistic kind %r" % kind)


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
