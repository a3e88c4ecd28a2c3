"""Campaign datasets backing the acceptance tests.

Each dataset is a JSONL file in tests/_cache keyed by a stable name.  A
missing or partial file is (re)generated record by record, so an
interrupted run resumes where it stopped; records carry their sample
index and are deduplicated on load.  Run ``python3 acceptance_data.py``
to pre-generate everything (several hours on one core).
"""

import json
import sys
from pathlib import Path

from veerstats.harness import WalkSpec, _campaign_job, run_pipeline
from veerstats.surface import SurfaceSpec
from veerstats.words import parse_word

CACHE = Path(__file__).resolve().parent / "_cache"

# name -> (genus, punctures, length, seed, count, store_shapes,
#          solver start budget, newton iteration cap)
# The decay campaigns only need the geometric/non-geometric verdict, so
# they run with the informed starts only and a tighter iteration cap.
CAMPAIGNS = {
    "s05_L200_N200": (0, 5, 200, 101, 200, True, None, None),
    "s12_L200_N200": (1, 2, 200, 202, 200, False, 18, None),
    "s12_decay_L50_N500": (1, 2, 50, 351, 500, False, 12, 150),
    "s12_decay_L100_N500": (1, 2, 100, 352, 500, False, 12, 150),
    "s12_decay_L150_N500": (1, 2, 150, 353, 500, False, 12, 150),
    "s12_decay_L200_N500": (1, 2, 200, 354, 500, False, 12, 150),
}

FAMILY_KS = (5, 10, 20, 40)
FAMILY_TEMPLATE = "(a0.b0!)^%d.p0"


def campaign(name, log=None):
    """Load (generating any missing records) the named campaign."""
    (genus, punctures, length, seed, count, shapes, restarts,
     iters) = CAMPAIGNS[name]
    path = CACHE / (name + ".jsonl")
    recs = {}
    if path.exists():
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                rec = json.loads(line)
                recs[rec["index"]] = rec
    missing = [i for i in range(count) if i not in recs]
    if missing:
        walk = WalkSpec(SurfaceSpec(genus, punctures), length,
                        seed=seed, count=count)
        with open(path, "a", encoding="utf-8") as fh:
            for i in missing:
                rec = _campaign_job((walk, i, None, shapes, restarts, iters))
                fh.write(json.dumps(rec) + "\n")
                fh.flush()
                recs[i] = rec
                if log:
                    print("%s %d/%d %s" % (name, len(recs), count,
                                           rec["status"]), file=log,
                          flush=True)
    return [recs[i] for i in range(count)]


def family(log=None):
    """Load (generating any missing exponents) the twist-power family."""
    path = CACHE / "family_twist_power.jsonl"
    recs = {}
    if path.exists():
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                rec = json.loads(line)
                recs[rec["k"]] = rec
    surface = SurfaceSpec(1, 2)
    with open(path, "a", encoding="utf-8") as fh:
        for k in FAMILY_KS:
            if k in recs:
                continue
            word = parse_word(surface, FAMILY_TEMPLATE % k)
            rec = run_pipeline(word)
            rec["k"] = k
            fh.write(json.dumps(rec) + "\n")
            fh.flush()
            recs[k] = rec
            if log:
                print("family k=%d %s" % (k, rec["status"]), file=log,
                      flush=True)
    return [recs[k] for k in FAMILY_KS]


FIGURE_KINDS = ("geometric", "hinge_density", "shapes_hex", "partition",
                "volume_scatter", "vol_per_hinge_hist", "suffix_range",
                "dilatation")


def export_figure_tables():
    """Write one table per figure kind into _cache/figures; the figure
    package's integration tests render them through its CSV interface."""
    import shutil

    from veerstats.harness import aggregate_stats, write_csv

    figdir = CACHE / "figures"
    figdir.mkdir(exist_ok=True)
    s05 = campaign("s05_L200_N200")
    s12 = campaign("s12_L200_N200")
    decay = []
    for length in (50, 100, 150, 200):
        decay += campaign("s12_decay_L%d_N500" % length)
    family()
    sources = {
        "geometric": decay,
        "hinge_density": s05 + s12,
        "shapes_hex": s05,
        "partition": s05,
        "volume_scatter": s05 + s12,
        "vol_per_hinge_hist": s12,
        "suffix_range": s05 + s12,
        "dilatation": s05 + s12,
    }
    for kind in FIGURE_KINDS:
        header, rows = aggregate_stats(sources[kind], kind)
        write_csv(str(figdir / (kind + ".csv")), header, rows)
    shutil.copyfile(CACHE / "family_twist_power.jsonl",
                    figdir / "family.jsonl")


def main():
    family(log=sys.stdout)
    for name in CAMPAIGNS:
        campaign(name, log=sys.stdout)
    export_figure_tables()
    print("all datasets complete")


if __name__ == "__main__":
    main()
