"""Symmetric eigendecomposition and regularized solves with ``K + n*lambda*I``.

The production statistic path uses the Cholesky-backed
:class:`RegularizedFactorization`; the eigendecomposition exists for
cross-checking spectral identities and for diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import InputError, NumericalError
from .kernels import KernelConfig, kernel_matrix

_CLAMP_REL = 1e-10


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues (descending) and orthonormal eigenvectors of a symmetric K.

    The eigenvalues are the ``sigma_i^2`` of the kernel matrix; tiny negative
    values from roundoff are clamped to zero.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def eigendecompose(K) -> EigenSystem:
    """Full symmetric eigendecomposition, symmetrizing the input first."""
    K = np.asarray(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise InputError(f"K must be square, got shape {K.shape}")
    Ks = 0.5 * (K + K.T)
    try:
        vals, vecs = np.linalg.eigh(Ks)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"eigendecomposition failed for {K.shape[0]}x{K.shape[0]} matrix "
            f"(|K|_max={np.abs(Ks).max():.3e}, trace={np.trace(Ks):.3e})"
        ) from exc
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    top = vals[0] if vals.size else 0.0
    if top > 0:
        vals = np.where((vals < 0) & (vals > -_CLAMP_REL * top), 0.0, vals)
    return EigenSystem(eigenvalues=vals, eigenvectors=vecs)


@dataclass
class RegularizedFactorization:
    """Cholesky handle for repeated solves ``(K + ridge*I)^{-1} b``.

    ``ridge`` is the full additive scalar ``n * lambda``.  The factorization
    is computed once and is immutable afterwards, so it can be shared across
    bootstrap replicates.
    """

    K: np.ndarray
    ridge: float
    _cho: tuple = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.ridge <= 0:
            raise NumericalError(f"ridge must be positive, got {self.ridge}")
        A = self.K + self.ridge * np.eye(self.K.shape[0])
        try:
            self._cho = sla.cho_factor(A, lower=True, check_finite=False)
        except sla.LinAlgError as exc:
            raise NumericalError(
                f"Cholesky factorization of K + {self.ridge:g}*I failed"
            ) from exc

    def solve(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=np.float64)
        if b.shape[0] != self.K.shape[0]:
            raise InputError(
                f"rhs has leading dimension {b.shape[0]}, expected {self.K.shape[0]}"
            )
        return sla.cho_solve(self._cho, b, check_finite=False)


def reg_solve(fact: RegularizedFactorization, b) -> np.ndarray:
    """Solve ``(K + ridge*I) x = b`` for a vector or matrix right-hand side."""
    return fact.solve(b)


@dataclass(frozen=True)
class KernelContext:
    """One test invocation's kernel state: config, lambda, K, and its solver.

    ``lam`` is the ridge regression parameter lambda; the factorization holds
    ``K + n*lam*I``.  Built once per invocation and reused by every statistic
    and every bootstrap replicate.
    """

    config: KernelConfig
    lam: float
    X: np.ndarray
    K: np.ndarray
    fact: RegularizedFactorization


def kernel_context(cfg: KernelConfig, X, lam: float) -> KernelContext:
    """Precompute the kernel matrix and the ``K + n*lambda*I`` factorization."""
    if lam <= 0:
        raise InputError(f"lambda must be positive, got {lam}")
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    K = kernel_matrix(cfg, X)
    fact = RegularizedFactorization(K=K, ridge=X.shape[0] * lam)
    return KernelContext(config=cfg, lam=lam, X=X, K=K, fact=fact)


def spectral_statistic(eig: EigenSystem, eps, lam: float, weight: str) -> float:
    """Evaluate a quadratic-form statistic through the eigensystem of K.

    With ``c_i = eps' u_i`` and ``h_i = sigma_i^2 / n`` the weights are

    * ``proj1``: ``h_i / (h_i + lam)^2``
    * ``proj2``: ``h_i / (h_i + lam)``
    * ``kcm``:   ``h_i``

    and the statistic is ``sum_i w_i c_i^2``, summed over residual columns.
    Each choice reproduces the matching direct matrix statistic exactly.
    """
    eps = np.asarray(eps, dtype=np.float64)
    if eps.ndim == 1:
        eps = eps[:, None]
    n = eig.eigenvalues.shape[0]
    if eps.shape[0] != n:
        raise InputError(
            f"residual length {eps.shape[0]} does not match eigensystem size {n}"
        )
    h = eig.eigenvalues / n
    if weight == "proj1":
        w = h / (h + lam) ** 2
    elif weight == "proj2":
        w = h / (h + lam)
    elif weight == "kcm":
        w = h
    else:
        raise InputError(f"unknown weight {weight!r}")
    c = eig.eigenvectors.T @ eps  # (n, q)
    return float(np.sum(w[:, None] * c**2))


def gaussian_measure_spectrum_oracle(
    gamma: float, sigma_x: float, count: int
) -> np.ndarray:
    """Closed-form spectrum of the Gaussian-kernel integral operator.

    For ``k(x, y) = exp(-gamma (x - y)^2)`` and the input measure
    ``N(0, sigma_x^2)`` on the real line, the integral operator on
    ``L2(P)`` has eigenvalues (Zhu, Williams, Rohwer & Morciniec 1997;
    Rasmussen & Williams 2006, section 4.3.1)

        mu_k = sqrt(2a / A) * B**k,   k = 0, 1, 2, ...

    with ``a = 1/(4 sigma_x^2)``, ``b = gamma``, ``c = sqrt(a^2 + 2ab)``,
    ``A = a + b + c``, ``B = b / A``.  The spectrum decays geometrically and
    sums to ``E[k(X, X)] = 1``, matching the normalization in which the
    kernel-matrix eigenvalues ``sigma_i^2 / n`` converge to ``mu_i``.
    Verified against a 2000-point Gauss-Hermite discretization of the
    operator in the test suite.
    """
    if gamma <= 0 or sigma_x <= 0:
        raise InputError("gamma and sigma_x must be positive")
    if count < 0:
        raise InputError("count must be nonnegative")
    a = 1.0 / (4.0 * sigma_x**2)
    b = gamma
    c = np.sqrt(a * a + 2.0 * a * b)
    A = a + b + c
    B = b / A
    return np.sqrt(2.0 * a / A) * B ** np.arange(count, dtype=np.float64)
