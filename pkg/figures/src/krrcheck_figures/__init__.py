"""Rendering scripts for krrcheck's CSV exports.

Reads the witness-grid CSV (columns ``x1..xd, w_1..w_q``) and the
power-vs-J CSV (columns ``J, statistic, rejection_rate, mc_stderr``) and
renders publication-style PNG/SVG figures. All correctness checks operate
on the parsed data, never on rendered pixels.
"""

__version__ = "0.1.0"

from .render import (
    FigureSpec,
    PowerCurveData,
    SchemaError,
    WitnessGridData,
    load_power_curve_csv,
    load_witness_grid_csv,
    render_power_curve,
    render_witness_heatmap,
)

__all__ = [
    "FigureSpec",
    "PowerCurveData",
    "SchemaError",
    "WitnessGridData",
    "load_power_curve_csv",
    "load_witness_grid_csv",
    "render_power_curve",
    "render_witness_heatmap",
]
