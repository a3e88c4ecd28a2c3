"""Publication-style figures from veerstats statistic tables.

This package only draws: every number displayed is read from a CSV table
produced by ``veerstats stats`` or a JSONL record file produced by the
``veerstats`` campaign commands.  No statistics are computed here.
"""

from .render import KINDS, PlotSpec, render

__all__ = ["KINDS", "PlotSpec", "render"]

__version__ = "0.1.0"
