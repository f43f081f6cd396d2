"""Exact workbench for divisors, chip firing, and tropical linear series on
metric graphs with rational edge lengths."""

from .errors import BudgetError
from .exact import INF, ExactnessError, parse_rational
from .graph import ClosedSubset, Divisor, MetricGraph, Point
from .localmat import (
    LocalMatroidResult,
    MinimizerReport,
    SectionReport,
    StarReport,
    has_big_minimizers,
    local_matroid,
    section_and_submatroid,
    star_matches_bergman,
    translate,
)
from .plfun import PLFunction
from .series import (
    Cell,
    CellComplex,
    CertifiedRank,
    ResidualConstraint,
    TlsReport,
    TropSubmodule,
    baker_norine_rank,
    cells,
    complete_system,
    direction_slope_sets,
    divisor_in_system,
    independence_rank,
    is_tls,
    nondegenerate,
    residual,
    restrict,
    span_coefficients,
)

__version__ = "0.1.0"

__all__ = [
    "INF",
    "BudgetError",
    "ExactnessError",
    "parse_rational",
    "ClosedSubset",
    "Divisor",
    "MetricGraph",
    "Point",
    "PLFunction",
    "LocalMatroidResult",
    "MinimizerReport",
    "SectionReport",
    "StarReport",
    "has_big_minimizers",
    "local_matroid",
    "section_and_submatroid",
    "star_matches_bergman",
    "translate",
    "Cell",
    "CellComplex",
    "CertifiedRank",
    "ResidualConstraint",
    "TlsReport",
    "TropSubmodule",
    "baker_norine_rank",
    "cells",
    "complete_system",
    "direction_slope_sets",
    "divisor_in_system",
    "independence_rank",
    "is_tls",
    "nondegenerate",
    "residual",
    "restrict",
    "span_coefficients",
    "__version__",
]
