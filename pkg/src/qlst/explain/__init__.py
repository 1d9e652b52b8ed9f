"""Traversal inference, calibration reports, and bundle export."""

from .calibration import (CalibrationReport, attained_probabilities,
                          eval_calibration)
from .export import export_bundle, load_bundle
from .traversal import (DEFAULT_GRID, TraversalBundle, explain_local,
                        traverse, traverse_global, validate_grid)

__all__ = [
    "DEFAULT_GRID", "TraversalBundle", "traverse", "traverse_global",
    "explain_local", "validate_grid", "CalibrationReport", "eval_calibration",
    "attained_probabilities", "export_bundle", "load_bundle",
]
