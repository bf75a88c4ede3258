"""KRR coefficient extraction and witness-function evaluation.

The fitted coefficient function ``w-hat(v) = sum_i alpha_i k(x_i, v)`` with
``alpha = (K + n lambda I)^{-1} eps`` localizes misspecification: |w-hat| is
large near covariate regions where the model fails.  Everything here is
evaluated through the alpha representation, which is exact for any kernel.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError
from .kernels import KernelConfig, kernel_cross
from .spectral import KernelContext


@dataclass(frozen=True)
class WitnessField:
    """A witness function evaluated over a grid of covariate points."""

    train_X: np.ndarray
    alpha: np.ndarray
    gamma: float
    lam: float
    grid: np.ndarray
    values: np.ndarray


def krr_alpha(eps, ctx: KernelContext) -> np.ndarray:
    """Dual coefficients ``alpha = (K + n lambda I)^{-1} eps``, per component.

    Fitted values at the training points are ``K alpha``.
    """
    eps = np.asarray(eps, dtype=np.float64)
    squeeze = eps.ndim == 1
    if squeeze:
        eps = eps[:, None]
    if eps.shape[0] != ctx.K.shape[0]:
        raise InputError(
            f"residual length {eps.shape[0]} does not match kernel size {ctx.K.shape[0]}"
        )
    alpha = ctx.fact.solve(eps)
    return alpha[:, 0] if squeeze else alpha


def witness_eval(alpha, train_X, cfg: KernelConfig, points) -> np.ndarray:
    """Evaluate ``w-hat`` at arbitrary points: ``(m, q)`` array of values."""
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.ndim == 1:
        alpha = alpha[:, None]
    kV = kernel_cross(cfg, train_X, points)  # (n, m)
    if kV.shape[0] != alpha.shape[0]:
        raise InputError(
            f"alpha has {alpha.shape[0]} rows, train_X has {kV.shape[0]}"
        )
    return kV.T @ alpha


def diagnostic_grid(X, resolution: int = 60, margin: float = 0.10) -> np.ndarray:
    """Row-major 2-d evaluation grid over the data's expanded bounding box.

    Only defined for d = 2 (the visualized case); higher dimensions evaluate
    at sampled locations instead.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != 2:
        raise InputError("diagnostic_grid is defined for d = 2")
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    pad = margin * (hi - lo)
    ax0 = np.linspace(lo[0] - pad[0], hi[0] + pad[0], resolution)
    ax1 = np.linspace(lo[1] - pad[1], hi[1] + pad[1], resolution)
    g0, g1 = np.meshgrid(ax0, ax1, indexing="ij")
    return np.column_stack([g0.ravel(), g1.ravel()])


def witness_field(eps, ctx: KernelContext, grid=None) -> WitnessField:
    """Fit alpha on the context's training data and evaluate over a grid."""
    alpha = krr_alpha(eps, ctx)
    if alpha.ndim == 1:
        alpha = alpha[:, None]
    if grid is None:
        grid = diagnostic_grid(ctx.X)
    grid = np.asarray(grid, dtype=np.float64)
    values = witness_eval(alpha, ctx.X, ctx.config, grid)
    return WitnessField(
        train_X=ctx.X,
        alpha=alpha,
        gamma=ctx.config.gamma,
        lam=ctx.lam,
        grid=grid,
        values=values,
    )


def witness_grid_export(field: WitnessField, path) -> Path:
    """Write the field as CSV: columns x1..xd, w_1..w_q, rows in grid order.

    Values carry 17 significant digits so a re-read reproduces them exactly.
    """
    path = Path(path)
    d = field.grid.shape[1]
    q = field.values.shape[1]
    header = [f"x{j + 1}" for j in range(d)] + [f"w_{r + 1}" for r in range(q)]
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for t in range(field.grid.shape[0]):
                row = [format(v, ".17g") for v in field.grid[t]]
                row += [format(v, ".17g") for v in field.values[t]]
                writer.writerow(row)
    except OSError as exc:
        raise InputError(f"cannot write witness grid to {path}: {exc}") from exc
    return path
