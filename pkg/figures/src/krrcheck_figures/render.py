"""Witness heatmaps and power-vs-J curves from krrcheck CSV exports.

Each renderer parses its CSV, validates the schema, draws the figure, and
returns the arrays it plotted, so tests can assert on data rather than
pixels. Rendering style is matplotlib's Agg backend; output format follows
the output path's extension (PNG or SVG).
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIGURE_KINDS = ("witness_heatmap", "power_curve")

# color half-range for an identically-zero field, so the flat panel still
# gets a symmetric scale around 0
ZERO_FIELD_EPS = 1e-12


class SchemaError(ValueError):
    """The input CSV does not match the declared export schema."""


@dataclass(frozen=True)
class FigureSpec:
    """One figure request: input CSV, figure kind, output path, labels."""

    input_csv: Path
    kind: str
    output: Path
    title: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; valid: {FIGURE_KINDS}")
        if not Path(self.input_csv).exists():
            raise SchemaError(f"input CSV not found: {self.input_csv}")


@dataclass(frozen=True)
class WitnessGridData:
    """Parsed witness-grid export: lattice axes plus per-component fields."""

    axis1: np.ndarray            # sorted unique x1 values, length n1
    axis2: np.ndarray            # sorted unique x2 values, length n2
    fields: np.ndarray           # (q, n1, n2) witness values per component
    points: np.ndarray           # original (m, 2) grid rows
    values: np.ndarray           # original (m, q) witness values


@dataclass(frozen=True)
class PowerCurveData:
    """Parsed power-vs-J export: one (J, power) series per statistic."""

    statistics: tuple
    series: dict = field(hash=False)


def _read_csv(path) -> tuple[list, list]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"empty CSV: {path}") from None
        rows = [row for row in reader if any(cell.strip() for cell in row)]
    if not rows:
        raise SchemaError(f"no data rows in {path}")
    return [h.strip() for h in header], rows


def load_witness_grid_csv(path) -> WitnessGridData:
    """Parse a witness-grid CSV (x1..xd, w_1..w_q) into a 2-d lattice.

    Heatmaps are defined for d = 2 exports whose rows form a complete
    row-major lattice; anything else is a schema error.
    """
    header, rows = _read_csv(path)
    x_cols = [h for h in header if h.startswith("x")]
    w_cols = [h for h in header if h.startswith("w_")]
    if len(x_cols) + len(w_cols) != len(header) or not w_cols:
        raise SchemaError(
            f"witness grid header must be x1..xd,w_1..w_q, got {header}"
        )
    if x_cols != [f"x{i + 1}" for i in range(len(x_cols))]:
        raise SchemaError(f"covariate columns out of order: {x_cols}")
    if len(x_cols) != 2:
        raise SchemaError(
            f"witness heatmaps need a d=2 export, got d={len(x_cols)}"
        )
    try:
        data = np.array([[float(c) for c in row] for row in rows])
    except ValueError as exc:
        raise SchemaError(f"non-numeric cell in {path}: {exc}") from None
    if data.shape[1] != len(header):
        raise SchemaError(f"ragged rows in {path}")
    points = data[:, :2]
    values = data[:, 2:]
    axis1 = np.unique(points[:, 0])
    axis2 = np.unique(points[:, 1])
    m = points.shape[0]
    if axis1.size * axis2.size != m:
        raise SchemaError(
            f"{m} rows do not form a complete {axis1.size} x {axis2.size} lattice"
        )
    expected = np.column_stack(
        [np.repeat(axis1, axis2.size), np.tile(axis2, axis1.size)]
    )
    if not np.array_equal(points, expected):
        raise SchemaError("grid rows are not in row-major lattice order")
    q = values.shape[1]
    fields = values.T.reshape(q, axis1.size, axis2.size)
    return WitnessGridData(
        axis1=axis1, axis2=axis2, fields=fields, points=points, values=values
    )


def render_witness_heatmap(spec: FigureSpec):
    """Render one heatmap panel per residual component.

    The color scale is a symmetric diverging map centered at zero (the null
    value of the witness function), shared across panels, with a colorbar.
    Returns ``(output_path, data, vlim)`` where ``data`` holds the plotted
    arrays and ``vlim`` the color half-range.
    """
    data = load_witness_grid_csv(spec.input_csv)
    q = data.fields.shape[0]
    vlim = float(np.max(np.abs(data.fields)))
    if vlim == 0.0:
        vlim = ZERO_FIELD_EPS
    fig, axes = plt.subplots(
        1, q, figsize=(5.2 * q, 4.4), squeeze=False, constrained_layout=True
    )
    extent = (
        float(data.axis1[0]), float(data.axis1[-1]),
        float(data.axis2[0]), float(data.axis2[-1]),
    )
    for r in range(q):
        ax = axes[0][r]
        im = ax.imshow(
            data.fields[r].T,
            origin="lower",
            extent=extent,
            cmap="RdBu_r",
            vmin=-vlim,
            vmax=vlim,
            aspect="auto",
        )
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
        if q > 1:
            ax.set_title(f"component {r + 1}")
        fig.colorbar(im, ax=ax)
    if spec.title:
        fig.suptitle(spec.title)
    out = Path(spec.output)
    fig.savefig(out)
    plt.close(fig)
    return out, data, vlim


def load_power_curve_csv(path) -> PowerCurveData:
    """Parse a power-vs-J CSV into per-statistic (J, power) series."""
    header, rows = _read_csv(path)
    required = ["J", "statistic", "rejection_rate"]
    if header[: len(required)] != required:
        raise SchemaError(
            f"power curve header must start with {required}, got {header}"
        )
    series: dict = {}
    for row in rows:
        try:
            J = int(row[0])
            rate = float(row[2])
        except (ValueError, IndexError) as exc:
            raise SchemaError(f"bad power row {row}: {exc}") from None
        if not 0.0 <= rate <= 1.0:
            raise SchemaError(f"rejection rate outside [0, 1]: {rate}")
        name = row[1].strip()
        series.setdefault(name, []).append((J, rate))
    for name, pts in series.items():
        pts.sort()
        series[name] = np.array(pts, dtype=np.float64)
    return PowerCurveData(statistics=tuple(sorted(series)), series=series)


def render_power_curve(spec: FigureSpec):
    """Render power against the number of random locations J.

    One line per statistic, y fixed to [0, 1], J on integer ticks.
    Returns ``(output_path, data)`` with the plotted series.
    """
    data = load_power_curve_csv(spec.input_csv)
    fig, ax = plt.subplots(figsize=(6.0, 4.2), constrained_layout=True)
    all_J: set = set()
    for name in data.statistics:
        pts = data.series[name]
        ax.plot(pts[:, 0], pts[:, 1], marker="o", label=name)
        all_J.update(int(j) for j in pts[:, 0])
    ax.set_xticks(sorted(all_J))
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel("number of random locations J")
    ax.set_ylabel("rejection rate")
    ax.legend()
    if spec.title:
        ax.set_title(spec.title)
    out = Path(spec.output)
    fig.savefig(out)
    plt.close(fig)
    return out, data


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="krrcheck-figures",
        description="Render krrcheck CSV exports as figures",
    )
    parser.add_argument("--kind", choices=FIGURE_KINDS, required=True)
    parser.add_argument("--input", type=Path, required=True)
    parser.add_argument("--output", type=Path, required=True)
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec(
            input_csv=args.input, kind=args.kind, output=args.output, title=args.title
        )
        if args.kind == "witness_heatmap":
            out, _, _ = render_witness_heatmap(spec)
        else:
            out, _ = render_power_curve(spec)
    except SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
