"""Read-only figure rendering for dzoa experiment CSV outputs.

Consumes the versioned trace and sweep CSVs through their documented file
format only — it never imports the optimization library or recomputes any
result. Two figures are provided: convergence curves (mean normalized
error over seeds vs outer iteration, shaded stderr, one curve per
(method, epsilon) at a fixed delta) and privacy-accuracy trade-off curves
(final error vs composed budget, or vs delta on a log axis).
"""

from .errors import SchemaError
from .figures import (
    Series,
    TRADEOFF_AXES,
    convergence_series,
    plot_convergence,
    plot_tradeoff,
    tradeoff_series,
)
from .tables import SWEEP_MARKER, TRACE_MARKER, SweepTable, TraceTable

__all__ = [
    "SWEEP_MARKER",
    "SchemaError",
    "Series",
    "SweepTable",
    "TRACE_MARKER",
    "TRADEOFF_AXES",
    "TraceTable",
    "convergence_series",
    "plot_convergence",
    "plot_tradeoff",
    "tradeoff_series",
]

__version__ = "0.1.0"
