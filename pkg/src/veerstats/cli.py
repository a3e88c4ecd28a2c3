"""Command-line interface.

Subcommands: ``sample`` (emit words), ``build`` (one word to triangulation
JSON), ``solve`` (triangulation JSON to geometry), ``run`` (campaign from a
flat key-value config file), ``stats`` (JSONL to CSV tables), ``family``
(the twist-power preset over a range of exponents).

The default working precision comes from the VEERSTATS_PRECISION
environment variable (bits, default 212).
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import VeerstatsError
from .geometry import build_gluing_system, solve_shapes
from .harness import (
    MODES,
    WalkSpec,
    aggregate_stats,
    default_precision,
    load_records,
    run_campaign,
    run_pipeline,
    sample_word,
    write_csv,
)
from .mtorus import triangulation_from_json
from .surface import SurfaceSpec
from .words import parse_word


def _surface(text):
    try:
        g, n = (int(x) for x in text.split(","))
        return SurfaceSpec(g, n)
    except ValueError:
        raise argparse.ArgumentTypeError(
            "surface must be 'genus,punctures', e.g. '1,2'"
        )


def _walk_args(p):
    p.add_argument("--surface", type=_surface, required=True)
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--mode", choices=MODES, default="simple")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)


def cmd_sample(args):
    walk = WalkSpec(args.surface, args.length, mode=args.mode,
                    seed=args.seed, count=args.count)
    for i in range(args.count):
        print(sample_word(walk, i))
    return 0


def cmd_build(args):
    word = parse_word(args.surface, args.word)
    record = run_pipeline(word, precision=args.precision)
    if record["status"] != "ok":
        print("build failed at stage %s: %s: %s"
              % (record["stage"], record["error"], record["message"]),
              file=sys.stderr)
        return 1
    # rebuild the triangulation for export (run_pipeline reports stats)
    from .mtorus import assemble_mapping_torus, assign_veering_colors
    from .pa import invariant_lamination
    from .splitting import split_to_periodicity
    from .stratum import puncture_stratum
    from .words import WordCompiler
    from mpmath import mp
    comp = WordCompiler(args.surface)
    lam = invariant_lamination(comp.compile(word),
                               precision=record["precision"])
    with mp.workprec(record["precision"]):
        strat = puncture_stratum(args.surface, comp.base, lam.stable_weights,
                                 punctures=comp.library.punctures)
        splitting = split_to_periodicity(
            strat.triangulation, strat.weights, lam.dilatation,
            record["precision"],
        )
    tv = assign_veering_colors(
        assemble_mapping_torus(splitting, strat.surface, monodromy=str(word))
    )
    out = tv.to_json()
    out["record"] = record
    text = json.dumps(out, indent=1)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_solve(args):
    with open(args.input, encoding="utf-8") as fh:
        data = json.load(fh)
    tv = triangulation_from_json(data)
    sa = solve_shapes(
        build_gluing_system(tv), precision=args.precision,
        hinge_flags=[tv.is_hinge(t) for t in range(tv.num_tetrahedra)],
    )
    data["geometry"] = sa.to_json()
    text = json.dumps(data, indent=1)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _parse_config(path):
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def cmd_run(args):
    cfg = _parse_config(args.config)
    walk = WalkSpec(
        _surface(cfg["surface"]),
        int(cfg["length"]),
        mode=cfg.get("mode", "simple"),
        seed=int(cfg.get("seed", 0)),
        count=int(cfg.get("count", 1)),
    )
    precision = int(cfg["precision"]) if "precision" in cfg else None
    records, summary = run_campaign(
        walk,
        out_path=cfg.get("out"),
        precision=precision,
        store_shapes=cfg.get("store_shapes", "0") in ("1", "true", "yes"),
        workers=int(cfg["workers"]) if "workers" in cfg else None,
        solver_restarts=int(cfg["restarts"]) if "restarts" in cfg else None,
        solver_iters=int(cfg["iters"]) if "iters" in cfg else None,
    )
    print("jobs: %d  ok: %d  failures: %r" %
          (summary.count, summary.ok, summary.failures_by_stage))
    print("mean hinge density: %.4f" % summary.mean_hinge_density)
    print("mean vol per hinge: %.4f" % summary.mean_vol_per_hinge)
    print("fraction geometric: %.4f" % summary.fraction_geometric)
    return 0


def cmd_stats(args):
    records = load_records(args.input)
    header, rows = aggregate_stats(records, args.kind,
                                   bin_size=args.bin_size)
    write_csv(args.out, header, rows)
    print("%s: %d rows -> %s" % (args.kind, len(rows), args.out))
    return 0


def cmd_family(args):
    ks = [int(x) for x in args.k.split(",")]
    with open(args.out, "a", encoding="utf-8") as fh:
        for k in ks:
            word = parse_word(args.surface, args.template.format(k=k))
            rec = run_pipeline(word, precision=args.precision)
            rec["k"] = k
            fh.write(json.dumps(rec) + "\n")
            status = rec["status"]
            extra = ("geometric=%s min_im=%.3g" %
                     (rec["geometric"], rec["min_im"])
                     if status == "ok" else rec["error"])
            print("k=%d %s %s" % (k, status, extra))
    return 0


def main(argv=None):
    ap = argparse.ArgumentParser(prog="veerstats", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="emit sampled words, one per line")
    _walk_args(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("build", help="build one word into triangulation JSON")
    p.add_argument("--surface", type=_surface, required=True)
    p.add_argument("--word", required=True)
    p.add_argument("--precision", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("solve", help="solve a triangulation JSON")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--precision", type=int, default=default_precision())
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("run", help="run a campaign from a config file")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("stats", help="aggregate a JSONL file into a CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--kind", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--bin-size", type=float, default=0.02)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("family", help="run the twist-power word family")
    p.add_argument("--surface", type=_surface, default=SurfaceSpec(1, 2))
    p.add_argument("--template", default="(a0.b0!)^{k}.p0")
    p.add_argument("--k", default="5,10,20,40")
    p.add_argument("--precision", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_family)

    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except VeerstatsError as err:
        print("error: %s: %s" % (type(err).__name__, err), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
