"""
Analysis of measured data: stabilizer tables and interference patterns.
"""

from .datalab import (
    CoincidenceQuad,
    MeasuredValue,
    StabilizerTable,
    counts_to_expectation,
    load_table,
    parse_table,
    witness_from_measurements,
)
from .fringe import FringeConfig, PatternPoint, Stage, coincidence_rate, fit_visibility, pattern

__all__ = [
    "CoincidenceQuad",
    "MeasuredValue",
    "StabilizerTable",
    "counts_to_expectation",
    "load_table",
    "parse_table",
    "witness_from_measurements",
    "FringeConfig",
    "PatternPoint",
    "Stage",
    "coincidence_rate",
    "fit_visibility",
    "pattern",
]
