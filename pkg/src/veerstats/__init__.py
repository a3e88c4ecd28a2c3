"""Veering triangulations of punctured-surface bundles and their statistics."""

from .surface import SurfaceSpec, Triangulation, flip_weight
from .bases import build_base_triangulation, generator_set
from .words import MappingClassWord, WordCompiler, parse_word
from .pa import PAResult, invariant_lamination
from .stratum import StratumResult, puncture_stratum
from .splitting import PeriodicSplitting, split_to_periodicity
from .mtorus import (
    VeeringTriangulation,
    assemble_mapping_torus,
    assign_veering_colors,
    triangulation_from_json,
)
from .geometry import (
    ShapeAssignment,
    build_gluing_system,
    check_solution,
    normalize_shape,
    solve_shapes,
    tet_volume,
)
from .hinges import HingeReport, abfmt_bound, classify_hinges
from .retriangulate import IdealComplex, geometric_volume
from .harness import (
    WalkSpec,
    aggregate_stats,
    load_records,
    run_campaign,
    run_pipeline,
    sample_word,
    summarize,
)

__all__ = [
    "SurfaceSpec",
    "Triangulation",
    "flip_weight",
    "build_base_triangulation",
    "generator_set",
    "MappingClassWord",
    "WordCompiler",
    "parse_word",
    "PAResult",
    "invariant_lamination",
    "StratumResult",
    "puncture_stratum",
    "PeriodicSplitting",
    "split_to_periodicity",
    "VeeringTriangulation",
    "assemble_mapping_torus",
    "assign_veering_colors",
    "triangulation_from_json",
    "ShapeAssignment",
    "build_gluing_system",
    "check_solution",
    "normalize_shape",
    "solve_shapes",
    "tet_volume",
    "HingeReport",
    "abfmt_bound",
    "classify_hinges",
    "IdealComplex",
    "geometric_volume",
    "WalkSpec",
    "aggregate_stats",
    "load_records",
    "run_campaign",
    "run_pipeline",
    "sample_word",
    "summarize",
]

__version__ = "0.1.0"
