"""Residual providers: OLS, probit propensity, and the joint propensity+CATE
system.

Each fit returns a :class:`FittedModel` carrying the estimated parameters,
an ``n x q`` residual matrix, and one analytic score matrix per residual
component (row i of component r is the gradient of that residual with
respect to theta at theta-hat).  The score matrices feed the
orthogonalization projector; they are analytic because bootstrap loops call
them on the hot path, with finite differences confined to the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import log_ndtr, ndtr, ndtri

from .errors import EstimationError, InputError

_SQRT_2PI = np.sqrt(2.0 * np.pi)

_PROBIT_TOL = 1e-8
_PROBIT_MAX_ITER = 100
_INDEX_DIVERGENCE = 35.0
_OVERLAP_DELTA = 1e-6


@dataclass(frozen=True)
class Dataset:
    """A raw sample: covariates, outcome, and an optional treatment indicator."""

    X: np.ndarray
    Y: np.ndarray
    T: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class FittedModel:
    """Estimated parameters plus everything the tests consume.

    ``residuals`` is always 2-d (n x q); ``scores[r]`` is the n x p gradient
    matrix of residual component r.
    """

    theta_hat: np.ndarray
    residuals: np.ndarray
    scores: list = field(default_factory=list)
    model_tag: str = "ols"

    def __post_init__(self) -> None:
        n = self.residuals.shape[0]
        for r, G in enumerate(self.scores):
            if G.shape[0] != n:
                raise InputError(
                    f"score matrix {r} has {G.shape[0]} rows, residuals have {n}"
                )


def _augment(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise InputError(f"X must be 2-d, got shape {X.shape}")
    if X.size and not np.all(np.isfinite(X)):
        raise InputError("X contains non-finite entries")
    return np.hstack([np.ones((X.shape[0], 1)), X])


def _check_full_rank(Xaug: np.ndarray) -> None:
    # Pivoted QR flags the dependent columns by name rather than just failing.
    import scipy.linalg as sla

    _, R, piv = sla.qr(Xaug, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = max(Xaug.shape) * np.finfo(np.float64).eps * (diag[0] if diag.size else 0.0)
    rank = int(np.sum(diag > tol))
    if rank < Xaug.shape[1]:
        bad = sorted(piv[rank:])
        names = ["intercept" if j == 0 else f"x{j - 1}" for j in bad]
        raise InputError(
            f"design matrix is rank deficient (rank {rank} < {Xaug.shape[1]}); "
            f"offending columns: {', '.join(names)}"
        )


def fit_ols(X, Y) -> FittedModel:
    """Least squares of Y on [1, X].

    Residual scores are ``-X_aug`` (the gradient of ``Y - X_aug theta`` with
    respect to theta), so the orthogonalization projector reduces to the
    usual annihilator and leaves OLS residuals untouched.
    """
    Xaug = _augment(X)
    Y = np.asarray(Y, dtype=np.float64).reshape(-1)
    n, p = Xaug.shape
    if Y.shape[0] != n:
        raise InputError(f"Y has length {Y.shape[0]}, X has {n} rows")
    if n <= p:
        raise InputError(f"need n > d + 1, got n={n}, d={p - 1}")
    _check_full_rank(Xaug)
    theta, *_ = np.linalg.lstsq(Xaug, Y, rcond=None)
    resid = Y - Xaug @ theta
    return FittedModel(
        theta_hat=theta,
        residuals=resid[:, None],
        scores=[-Xaug],
        model_tag="ols",
    )


def _probit_loglik(z: np.ndarray, T: np.ndarray) -> float:
    # log Phi and log Phi(-z) computed in log space to survive |z| ~ 30
    return float(np.sum(np.where(T == 1, log_ndtr(z), log_ndtr(-z))))


def _probit_gen_residual(z: np.ndarray, T: np.ndarray) -> np.ndarray:
    # lambda_i = phi(z) (T - Phi(z)) / (Phi(z)(1 - Phi(z))), stable in the tails
    log_phi = -0.5 * z**2 - np.log(_SQRT_2PI)
    lam = np.where(
        T == 1,
        np.exp(log_phi - log_ndtr(z)),
        -np.exp(log_phi - log_ndtr(-z)),
    )
    return lam


def fit_probit(X, T) -> FittedModel:
    """Probit MLE of ``P(T=1 | X) = Phi([1, X] beta)`` by Newton-Raphson.

    The probit log-likelihood is globally concave, so full Newton steps with
    step halving converge quickly; failure to reach ||grad|| <= 1e-8 within
    100 iterations (e.g. under perfect separation, where beta diverges) is
    reported as an estimation error.
    """
    Xaug = _augment(X)
    T = np.asarray(T, dtype=np.float64).reshape(-1)
    n, p = Xaug.shape
    if T.shape[0] != n:
        raise InputError(f"T has length {T.shape[0]}, X has {n} rows")
    if not np.all((T == 0) | (T == 1)):
        raise InputError("T must be a 0/1 vector")
    if T.min() == T.max():
        raise InputError("T has a single class; probit is not identified")
    if n <= p:
        raise InputError(f"need n > d + 1, got n={n}, d={p - 1}")
    _check_full_rank(Xaug)

    beta = np.zeros(p)
    beta[0] = ndtri(T.mean())  # intercept-only start
    ll = _probit_loglik(Xaug @ beta, T)
    converged = False
    for _ in range(_PROBIT_MAX_ITER):
        z = Xaug @ beta
        if np.max(np.abs(z)) > _INDEX_DIVERGENCE:
            # Phi saturates in float64 out here, the likelihood goes flat,
            # and the gradient vanishes numerically while beta escapes
            raise EstimationError(
                "probit index diverged (possible perfect separation): "
                f"max |x'beta| = {np.max(np.abs(z)):.3g}"
            )
        lam = _probit_gen_residual(z, T)
        grad = Xaug.T @ lam
        if np.linalg.norm(grad) <= _PROBIT_TOL:
            converged = True
            break
        w = lam * (lam + z)  # -d^2 loglik / dz^2, nonnegative by concavity
        H = Xaug.T @ (w[:, None] * Xaug)
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError as exc:
            raise EstimationError("probit Hessian is singular") from exc
        scale = 1.0
        while scale > 1e-10:
            cand = beta + scale * step
            ll_cand = _probit_loglik(Xaug @ cand, T)
            if ll_cand >= ll:
                break
            scale *= 0.5
        beta = beta + scale * step
        ll = _probit_loglik(Xaug @ beta, T)
    if not converged:
        z = Xaug @ beta
        lam = _probit_gen_residual(z, T)
        if np.linalg.norm(Xaug.T @ lam) > _PROBIT_TOL:
            raise EstimationError(
                "probit did not converge in "
                f"{_PROBIT_MAX_ITER} iterations (possible separation)"
            )

    z = Xaug @ beta
    p_hat = ndtr(z)
    phi = np.exp(-0.5 * z**2) / _SQRT_2PI
    resid = T - p_hat
    scores = -phi[:, None] * Xaug
    return FittedModel(
        theta_hat=beta,
        residuals=resid[:, None],
        scores=[scores],
        model_tag="probit",
    )


def known_theta_model(eps) -> FittedModel:
    """Residual provider for the known-parameter mode: no estimation effect.

    With theta0 known there is nothing to orthogonalize against, so the score
    matrices are empty and the projection reduces to the identity; the test
    statistics then run on the raw residuals, matching the known-theta theory.
    """
    eps = np.asarray(eps, dtype=np.float64)
    if eps.ndim == 1:
        eps = eps[:, None]
    n, q = eps.shape
    return FittedModel(
        theta_hat=np.empty(0),
        residuals=eps,
        scores=[np.empty((n, 0)) for _ in range(q)],
        model_tag="known_theta",
    )


def joint_cate_residuals(X, Y, T, fitted_probit: FittedModel) -> FittedModel:
    """Two-component residual for the joint propensity + zero-CATE test.

    Component 1 is the probit residual ``T - Phi(z)``; component 2 is the
    inverse-propensity-weighted outcome contrast
    ``Y (T - Phi(z)) / (Phi(z)(1 - Phi(z)))``, whose conditional mean is the
    CATE when the propensity model is correct.  Fitted propensities must stay
    inside (delta, 1-delta); rows violating the overlap guard are listed in
    the error.

    The component-2 score rows are the analytic gradient

        d eps2 / d beta = -Y phi(z) [p(1-p) + (T-p)(1-2p)] / (p(1-p))^2 * x

    with ``p = Phi(z)`` (quotient rule in z, then chain rule through
    ``z = x' beta``); the test suite checks it against central finite
    differences.
    """
    if fitted_probit.model_tag != "probit":
        raise InputError("fitted_probit must come from fit_probit")
    Xaug = _augment(X)
    Y = np.asarray(Y, dtype=np.float64).reshape(-1)
    T = np.asarray(T, dtype=np.float64).reshape(-1)
    n = Xaug.shape[0]
    if Y.shape[0] != n or T.shape[0] != n:
        raise InputError("X, Y, T must have matching row counts")

    beta = fitted_probit.theta_hat
    z = Xaug @ beta
    p = ndtr(z)
    bad = np.flatnonzero((p <= _OVERLAP_DELTA) | (p >= 1.0 - _OVERLAP_DELTA))
    if bad.size:
        raise InputError(
            "overlap violation: fitted propensities outside "
            f"({_OVERLAP_DELTA:g}, {1 - _OVERLAP_DELTA:g}) at rows "
            f"{bad.tolist()[:20]}"
        )
    phi = np.exp(-0.5 * z**2) / _SQRT_2PI
    v = p * (1.0 - p)
    eps1 = T - p
    eps2 = Y * eps1 / v

    g1 = -phi[:, None] * Xaug
    deps2_dz = -Y * phi * (v + eps1 * (1.0 - 2.0 * p)) / v**2
    g2 = deps2_dz[:, None] * Xaug
    return FittedModel(
        theta_hat=beta,
        residuals=np.column_stack([eps1, eps2]),
        scores=[g1, g2],
        model_tag="probit_cate_joint",
    )
