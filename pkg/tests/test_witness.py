import csv

import numpy as np
import pytest

from krrcheck import (
    DgpSpec,
    InputError,
    KernelConfig,
    generate,
    kernel_context,
    kernel_cross,
    krr_alpha,
    median_heuristic,
    stat_proj1,
    witness_eval,
    witness_field,
    witness_grid_export,
)
from krrcheck.simulate import fig1_true_residuals
from krrcheck.witness import diagnostic_grid


def test_alpha_zero_residuals():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((10, 2))
    ctx = kernel_context(KernelConfig(gamma=0.5), X, 0.1)
    np.testing.assert_array_equal(krr_alpha(np.zeros(10), ctx), np.zeros(10))


def test_alpha_scaled_identity():
    # far-apart points make K = I, so (I + 3 I)^{-1} (4, 8) = (1, 2)
    X = np.array([[0.0], [1e4]])
    ctx = kernel_context(KernelConfig(gamma=1.0), X, lam=1.5)
    alpha = krr_alpha(np.array([4.0, 8.0]), ctx)
    np.testing.assert_allclose(alpha, [1.0, 2.0], rtol=1e-12)


def test_alpha_proj1_identity():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((30, 2))
    ctx = kernel_context(KernelConfig(gamma=0.7), X, 0.05)
    eps = rng.standard_normal(30)
    alpha = krr_alpha(eps, ctx)
    assert 30 * alpha @ ctx.K @ alpha == pytest.approx(stat_proj1(eps, ctx).value, rel=1e-10)


def test_witness_eval_zero_alpha():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((8, 2))
    out = witness_eval(np.zeros(8), X, KernelConfig(gamma=1.0), rng.standard_normal((5, 2)))
    np.testing.assert_array_equal(out, np.zeros((5, 1)))


def test_witness_eval_at_training_points_is_K_alpha():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((15, 2))
    ctx = kernel_context(KernelConfig(gamma=0.4), X, 0.1)
    eps = rng.standard_normal(15)
    alpha = krr_alpha(eps, ctx)
    vals = witness_eval(alpha, X, ctx.config, X)
    np.testing.assert_allclose(vals[:, 0], ctx.K @ alpha, atol=1e-12)


def test_witness_matches_rand_inner_terms():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((20, 2))
    ctx = kernel_context(KernelConfig(gamma=0.6), X, 0.02)
    eps = rng.standard_normal(20)
    V = rng.standard_normal((3, 2))
    kV = kernel_cross(ctx.config, X, V)
    inner = ctx.fact.solve(eps) @ kV  # eps' (K + n lam I)^{-1} k(v_j)
    w = witness_eval(krr_alpha(eps, ctx), X, ctx.config, V)
    np.testing.assert_allclose(w[:, 0], inner, atol=1e-12)


def test_diagnostic_grid_covers_expanded_bbox():
    rng = np.random.default_rng(5)
    X = rng.uniform(-1, 2, (50, 2))
    grid = diagnostic_grid(X, resolution=60)
    assert grid.shape == (3600, 2)
    lo, hi = X.min(axis=0), X.max(axis=0)
    pad = 0.10 * (hi - lo)
    np.testing.assert_allclose(grid.min(axis=0), lo - pad, rtol=1e-12)
    np.testing.assert_allclose(grid.max(axis=0), hi + pad, rtol=1e-12)
    with pytest.raises(InputError):
        diagnostic_grid(rng.standard_normal((10, 3)))


def test_grid_export_shape_and_roundtrip(tmp_path):
    rng = np.random.default_rng(6)
    X = rng.standard_normal((12, 2))
    ctx = kernel_context(KernelConfig(gamma=0.5), X, 0.1)
    grid = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    field = witness_field(rng.standard_normal(12), ctx, grid=grid)
    path = witness_grid_export(field, tmp_path / "grid.csv")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x1", "x2", "w_1"]
    assert len(rows) == 5
    # full-precision round trip
    values = np.array([[float(c) for c in row] for row in rows[1:]])
    np.testing.assert_array_equal(values[:, :2], grid)
    np.testing.assert_array_equal(values[:, 2], field.values[:, 0])


def test_unwritable_path_raises(tmp_path):
    rng = np.random.default_rng(7)
    X = rng.standard_normal((5, 2))
    ctx = kernel_context(KernelConfig(gamma=0.5), X, 0.1)
    field = witness_field(rng.standard_normal(5), ctx, grid=np.zeros((1, 2)))
    with pytest.raises(InputError):
        witness_grid_export(field, tmp_path / "no_such_dir" / "grid.csv")


def _mean_abs_witness(dgp_id: str, seed: int, n: int = 500) -> float:
    ds = generate(DgpSpec(id=dgp_id, n=n, d=2, seed=seed))
    eps = fig1_true_residuals(ds)
    gamma = median_heuristic(ds.X)
    ctx = kernel_context(KernelConfig(gamma=gamma), ds.X, lam=1e-2)
    field = witness_field(eps, ctx)
    return float(np.mean(np.abs(field.values)))


def test_alternative_witness_dominates_null():
    # quadratic-alternative fields are far larger than null fields at n=500
    assert _mean_abs_witness("fig1_dgp1", seed=100) >= 5.0 * _mean_abs_witness(
        "fig1_dgp0", seed=100
    )
