import numpy as np
import pytest
from scipy.special import ndtr, ndtri

from krrcheck import (
    EstimationError,
    InputError,
    fit_ols,
    fit_probit,
    joint_cate_residuals,
)


def make_probit_data(rng, n=400, d=3, beta=None):
    X = rng.standard_normal((n, d))
    if beta is None:
        beta = np.concatenate([[0.3], rng.uniform(-1, 1, d)])
    z = beta[0] + X @ beta[1:]
    T = (rng.random(n) < ndtr(z)).astype(float)
    return X, T, beta


class TestOls:
    def test_exact_fit_zero_residuals(self):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((30, 2))
        Y = 2.0 + X @ np.array([1.0, -3.0])
        fm = fit_ols(X, Y)
        np.testing.assert_allclose(fm.residuals, 0.0, atol=1e-12)

    def test_intercept_only(self):
        Y = np.array([1.0, 2.0, 6.0])
        fm = fit_ols(np.empty((3, 0)), Y)
        assert fm.theta_hat[0] == pytest.approx(Y.mean())
        np.testing.assert_allclose(fm.residuals[:, 0], Y - Y.mean())

    def test_normal_equation_oracle(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((100, 3))
        Y = rng.standard_normal(100)
        fm = fit_ols(X, Y)
        Xa = np.hstack([np.ones((100, 1)), X])
        theta = np.linalg.solve(Xa.T @ Xa, Xa.T @ Y)
        np.testing.assert_allclose(fm.theta_hat, theta, atol=1e-10)

    def test_residuals_orthogonal_to_scores(self):
        rng = np.random.default_rng(2)
        X = rng.standard_normal((60, 4))
        Y = rng.standard_normal(60)
        fm = fit_ols(X, Y)
        assert np.max(np.abs(fm.scores[0].T @ fm.residuals[:, 0])) <= 1e-8

    def test_rank_deficiency_names_columns(self):
        X = np.zeros((10, 2))
        X[:, 0] = np.arange(10)
        X[:, 1] = 2 * np.arange(10)  # collinear with column 0
        with pytest.raises(InputError, match=r"offending columns: x[01]"):
            fit_ols(X, np.zeros(10))

    def test_too_few_rows(self):
        with pytest.raises(InputError):
            fit_ols(np.zeros((3, 3)), np.zeros(3))


class TestProbit:
    def test_intercept_only_closed_form(self):
        rng = np.random.default_rng(3)
        T = (rng.random(200) < 0.7).astype(float)
        fm = fit_probit(np.empty((200, 0)), T)
        assert fm.theta_hat[0] == pytest.approx(ndtri(T.mean()), abs=1e-8)

    def test_first_order_condition(self):
        rng = np.random.default_rng(4)
        X, T, _ = make_probit_data(rng)
        fm = fit_probit(X, T)
        Xa = np.hstack([np.ones((len(T), 1)), X])
        z = Xa @ fm.theta_hat
        phi = np.exp(-0.5 * z**2) / np.sqrt(2 * np.pi)
        lam = phi * (T - ndtr(z)) / (ndtr(z) * (1 - ndtr(z)))
        assert np.linalg.norm(Xa.T @ lam) <= 1e-6

    def test_score_matches_finite_differences(self):
        rng = np.random.default_rng(5)
        X, T, _ = make_probit_data(rng, n=80, d=2)
        fm = fit_probit(X, T)
        Xa = np.hstack([np.ones((80, 1)), X])
        h = 1e-6
        fd = np.empty_like(fm.scores[0])
        for j in range(Xa.shape[1]):
            bp = fm.theta_hat.copy()
            bm = fm.theta_hat.copy()
            bp[j] += h
            bm[j] -= h
            fd[:, j] = ((T - ndtr(Xa @ bp)) - (T - ndtr(Xa @ bm))) / (2 * h)
        assert np.max(np.abs(fm.scores[0] - fd)) <= 1e-6

    def test_monte_carlo_consistency(self):
        rng = np.random.default_rng(6)
        beta = np.array([0.2, 0.5, -0.4, 0.3])
        X, T, _ = make_probit_data(rng, n=2000, d=3, beta=beta)
        fm = fit_probit(X, T)
        assert np.max(np.abs(fm.theta_hat - beta)) <= 0.15

    def test_single_class_rejected(self):
        with pytest.raises(InputError):
            fit_probit(np.zeros((10, 1)), np.ones(10))

    def test_separation_raises(self):
        # T perfectly determined by x -> likelihood is maximized at infinity
        X = np.linspace(-2, 2, 40)[:, None]
        T = (X[:, 0] > 0).astype(float)
        with pytest.raises(EstimationError):
            fit_probit(X, T)

    def test_nonbinary_rejected(self):
        with pytest.raises(InputError):
            fit_probit(np.zeros((10, 1)), np.full(10, 0.5))


class TestJointCate:
    def test_zero_outcome_zero_second_component(self):
        rng = np.random.default_rng(7)
        X, T, _ = make_probit_data(rng, n=120, d=2)
        fm = fit_probit(X, T)
        joint = joint_cate_residuals(X, np.zeros(120), T, fm)
        assert joint.residuals.shape == (120, 2)
        np.testing.assert_allclose(joint.residuals[:, 1], 0.0)
        np.testing.assert_allclose(joint.residuals[:, 0], fm.residuals[:, 0])

    def test_direct_formula_at_half(self):
        # Phi = 0.5, Y = 1, T = 1 -> (1 - 0.5)/0.25 = 2; built from a balanced
        # symmetric sample so the probit fit lands on beta = 0
        X = np.array([[1.0], [-1.0], [1.0], [-1.0]])
        T = np.array([1.0, 1.0, 0.0, 0.0])
        fm = fit_probit(X, T)
        np.testing.assert_allclose(fm.theta_hat, 0.0, atol=1e-8)
        joint = joint_cate_residuals(X, np.ones(4), T, fm)
        assert joint.residuals[0, 1] == pytest.approx(2.0, abs=1e-7)

    def test_second_component_gradient_finite_differences(self):
        rng = np.random.default_rng(8)
        # mild coefficients keep every fitted propensity inside the overlap band
        X, T, _ = make_probit_data(rng, n=150, d=3, beta=np.array([0.2, 0.3, -0.2, 0.25]))
        Y = rng.standard_normal(150) + 1.0
        fm = fit_probit(X, T)
        joint = joint_cate_residuals(X, Y, T, fm)
        Xa = np.hstack([np.ones((150, 1)), X])
        beta = fm.theta_hat
        h = 1e-6

        def eps2(b):
            p = ndtr(Xa @ b)
            return Y * (T - p) / (p * (1 - p))

        fd = np.empty_like(joint.scores[1])
        for j in range(Xa.shape[1]):
            bp, bm = beta.copy(), beta.copy()
            bp[j] += h
            bm[j] -= h
            fd[:, j] = (eps2(bp) - eps2(bm)) / (2 * h)
        scale = np.maximum(np.abs(fd), 1.0)
        assert np.max(np.abs(joint.scores[1] - fd) / scale) <= 1e-5

    def test_overlap_guard(self):
        rng = np.random.default_rng(9)
        X, T, _ = make_probit_data(rng, n=120, d=1)
        fm = fit_probit(X, T)
        # inject an extreme covariate so its fitted propensity underflows
        X2 = X.copy()
        X2[0, 0] = 1e4 * np.sign(-fm.theta_hat[1] or 1.0)
        with pytest.raises(InputError, match="overlap"):
            joint_cate_residuals(X2, np.ones(120), T, fm)

    def test_requires_probit_model(self):
        rng = np.random.default_rng(10)
        X = rng.standard_normal((50, 2))
        fm = fit_ols(X, rng.standard_normal(50))
        with pytest.raises(InputError):
            joint_cate_residuals(X, np.zeros(50), np.zeros(50), fm)


def test_all_scores_match_finite_differences_ols():
    # the OLS residual map is linear in theta, so the FD check is exact
    rng = np.random.default_rng(11)
    X = rng.standard_normal((40, 2))
    Y = rng.standard_normal(40)
    fm = fit_ols(X, Y)
    Xa = np.hstack([np.ones((40, 1)), X])
    h = 1e-6
    fd = np.empty_like(fm.scores[0])
    for j in range(3):
        tp, tm = fm.theta_hat.copy(), fm.theta_hat.copy()
        tp[j] += h
        tm[j] -= h
        fd[:, j] = ((Y - Xa @ tp) - (Y - Xa @ tm)) / (2 * h)
    assert np.max(np.abs(fm.scores[0] - fd)) <= 1e-5
