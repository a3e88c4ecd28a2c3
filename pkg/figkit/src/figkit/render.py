"""Figure renderers, one per statistic table kind.

Each renderer consumes the table produced by ``veerstats stats --kind ...``
(CSV) or, for ``family``, the JSONL record file written by
``veerstats family``.  Rendering never alters or reorders the input data.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import Arc, RegularPolygon

# volume of the regular ideal tetrahedron
V3 = 1.0149416064096536

# expected CSV header per kind; a mismatch means the input was built by a
# different tool or a different --kind and is rejected, not guessed at
_HEADERS = {
    "shapes_hex": ("x", "y", "hinge_weight", "nonhinge_weight", "total"),
    "geometric": ("length_bucket", "fraction_geometric", "count"),
    "hinge_density": ("surface", "mean_hinge_density", "count"),
    "partition": ("partition", "count", "proportion"),
    "volume_scatter": ("num_tets", "num_hinges", "volume",
                       "slope_vs_tets", "slope_vs_hinges"),
    "vol_per_hinge_hist": ("bin_left", "bin_right", "count",
                           "expected_value"),
    "suffix_range": ("min_length", "min_vol_per_hinge",
                     "max_vol_per_hinge", "count"),
    "dilatation": ("log_dilatation", "volume", "num_tets", "surface"),
}

KINDS = tuple(sorted(_HEADERS)) + ("family",)


class FigkitError(Exception):
    """Base class for rendering errors."""


class MissingInput(FigkitError):
    pass


class SchemaError(FigkitError):
    pass


@dataclass
class PlotSpec:
    input: str
    kind: str
    out: str
    yscale: str = None          # override the kind's default axis scale
    bin_size: float = 0.02      # hexagon circumradius for shapes_hex
    dpi: int = 150
    extra_inputs: tuple = field(default_factory=tuple)


def _load_csv(path, kind):
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as err:
        raise MissingInput(str(err))
    with fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise SchemaError("%s: empty file, no header row" % path)
        if header != _HEADERS[kind]:
            raise SchemaError(
                "%s: header %r does not match kind %r (expected %r)"
                % (path, header, kind, _HEADERS[kind])
            )
        rows = []
        for raw in reader:
            row = []
            for cell in raw:
                try:
                    row.append(float(cell))
                except ValueError:
                    row.append(cell)
            rows.append(row)
    return rows


def _load_jsonl(path):
    try:
        fh = open(path, encoding="utf-8")
    except OSError as err:
        raise MissingInput(str(err))
    with fh:
        try:
            return [json.loads(line) for line in fh if line.strip()]
        except json.JSONDecodeError as err:
            raise SchemaError("%s: %s" % (path, err))


def _hexagon(ax, x, y, radius, color, alpha):
    ax.add_patch(RegularPolygon(
        (x, y), numVertices=6, radius=radius, orientation=0.0,
        facecolor=color, edgecolor="none", alpha=alpha,
    ))


def draw_shapes_hex(ax, rows, bin_size=0.02):
    """Hex-bin histogram over the fundamental region B for shape orbits.

    Each bin is split into a border hexagon (hinge weight) and a central
    hexagon (non-hinge weight); opacity encodes weight relative to the
    heaviest bin.  The circular-arc boundary of
    B = {|z| <= 1} intersect {|z - 1| <= 1} is drawn for reference.
    """
    peak = max((row[4] for row in rows), default=0.0)
    for x, y, hinge_w, nonhinge_w, total in rows:
        if total <= 0:
            continue
        scale = math.sqrt(total / peak)
        if hinge_w > 0:
            _hexagon(ax, x, y, bin_size, "tab:red",
                     scale * hinge_w / total)
        if nonhinge_w > 0:
            _hexagon(ax, x, y, 0.55 * bin_size, "tab:blue",
                     scale * nonhinge_w / total)
    # boundary arcs: |z| = 1 for Re z >= 1/2, |z-1| = 1 for Re z <= 1/2
    ax.add_patch(Arc((0, 0), 2, 2, theta1=-60, theta2=60,
                     color="0.5", lw=0.8))
    ax.add_patch(Arc((1, 0), 2, 2, theta1=120, theta2=240,
                     color="0.5", lw=0.8))
    ax.set_xlim(-0.1, 1.1)
    ax.set_ylim(-1.0, 1.0)
    ax.set_aspect("equal")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")


def draw_geometric(ax, rows, yscale="log"):
    """Fraction of geometric solutions per word-length bucket, semilog;
    buckets with fraction zero are omitted (they have no log image)."""
    pts = [(row[0], row[1]) for row in rows if row[1] > 0]
    if pts:
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-")
    ax.set_yscale(yscale)
    ax.set_xlabel("word length")
    ax.set_ylabel("fraction geometric")


def draw_hinge_density(ax, rows):
    if rows:
        labels = [str(row[0]) for row in rows]
        ax.bar(range(len(rows)), [row[1] for row in rows])
        ax.set_xticks(range(len(rows)), labels)
    ax.set_ylabel("mean hinge density")


def draw_volume_scatter(axes, rows):
    """Volume against tetrahedron count and against hinge count, with the
    least-squares slope line from the table."""
    ax_t, ax_h = axes
    for ax, xi, slope_i, label in (
        (ax_t, 0, 3, "tetrahedra"), (ax_h, 1, 4, "hinge tetrahedra"),
    ):
        xs = [row[xi] for row in rows]
        ys = [row[2] for row in rows]
        ax.plot(xs, ys, ".", ms=3, alpha=0.5)
        if len(rows) >= 2 and not math.isnan(rows[0][slope_i]):
            s = rows[0][slope_i]
            mx = sum(xs) / len(xs)
            my = sum(ys) / len(ys)
            lo, hi = min(xs), max(xs)
            ax.plot([lo, hi], [my + s * (lo - mx), my + s * (hi - mx)],
                    "r-", lw=1, label="slope %.4f" % s)
            ax.legend()
        ax.set_xlabel(label)
        ax.set_ylabel("volume")


def draw_vol_per_hinge_hist(ax, rows):
    if rows:
        width = rows[0][1] - rows[0][0]
        ax.bar([row[0] for row in rows], [row[2] for row in rows],
               width=width, align="edge")
        expected = rows[0][3]
        ax.axvline(expected, color="r", lw=1)
        ax.annotate("E = %.4f" % expected, (expected, ax.get_ylim()[1]),
                    ha="left", va="top", color="r")
    ax.set_xlabel("volume per hinge")
    ax.set_ylabel("count")


def draw_suffix_range(ax, rows):
    """Range of volume-per-hinge over all words of length at least x."""
    if rows:
        xs = [row[0] for row in rows]
        ax.fill_between(xs, [row[1] for row in rows],
                        [row[2] for row in rows], alpha=0.4)
    ax.set_xlabel("minimum word length")
    ax.set_ylabel("volume per hinge range")


def draw_partition(ax, rows):
    """Proportion of runs per singularity partition of the punctures."""
    if rows:
        ax.bar(range(len(rows)), [row[2] for row in rows])
        ax.set_xticks(range(len(rows)), [str(row[0]) for row in rows],
                      rotation=45, ha="right")
    ax.set_ylabel("proportion")


def draw_dilatation(ax, rows):
    if rows:
        ax.plot([row[0] for row in rows], [row[1] for row in rows],
                ".", ms=3, alpha=0.5)
    ax.set_xlabel("log dilatation")
    ax.set_ylabel("volume")


def draw_family(axes, records):
    """Three panels over the twist-power exponent k: flatness margin,
    excess volume per hinge over the regular-tetrahedron value, and the
    longest non-hinge chain."""
    recs = sorted((r for r in records if r.get("status") == "ok"),
                  key=lambda r: r["k"])
    ks = [r["k"] for r in recs]
    ax_im, ax_vph, ax_chain = axes
    if recs:
        ax_im.plot(ks, [r["min_im"] for r in recs], "o-")
        excess = [r["vol_per_hinge"] - V3 for r in recs]
        if all(e > 0 for e in excess):
            ax_vph.set_yscale("log")
        ax_vph.plot(ks, excess, "o-")
        ax_chain.plot(ks, [r["max_chain"] for r in recs], "o-")
        ax_im.set_yscale("log")
    ax_im.set_ylabel("min Im z")
    ax_vph.set_ylabel("vol/hinge - v3")
    ax_chain.set_ylabel("max non-hinge chain")
    for ax in axes:
        ax.set_xlabel("k")


def render(spec: PlotSpec):
    """Render one figure and write it to ``spec.out``; returns the path."""
    kind = spec.kind
    if kind not in KINDS:
        raise FigkitError(
            "unknown figure kind %r (choose from %s)"
            % (kind, ", ".join(KINDS))
        )
    if kind == "family":
        records = _load_jsonl(spec.input)
        fig, axes = plt.subplots(1, 3, figsize=(12, 3.5))
        draw_family(axes, records)
    elif kind == "volume_scatter":
        rows = _load_csv(spec.input, kind)
        fig, axes = plt.subplots(1, 2, figsize=(9, 4))
        draw_volume_scatter(axes, rows)
    else:
        rows = _load_csv(spec.input, kind)
        fig, ax = plt.subplots(figsize=(5.5, 4.5))
        if kind == "shapes_hex":
            draw_shapes_hex(ax, rows, bin_size=spec.bin_size)
        elif kind == "geometric":
            draw_geometric(ax, rows, yscale=spec.yscale or "log")
        elif kind == "hinge_density":
            draw_hinge_density(ax, rows)
        elif kind == "vol_per_hinge_hist":
            draw_vol_per_hinge_hist(ax, rows)
        elif kind == "suffix_range":
            draw_suffix_range(ax, rows)
        elif kind == "partition":
            draw_partition(ax, rows)
        elif kind == "dilatation":
            draw_dilatation(ax, rows)
        if spec.yscale and kind not in ("geometric",):
            ax.set_yscale(spec.yscale)
    fig.tight_layout()
    fig.savefig(spec.out, dpi=spec.dpi)
    plt.close(fig)
    return spec.out
