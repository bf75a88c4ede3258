"""The KRR model-check statistics, benchmark quadratic forms, and
random-location machinery.

Every statistic is a nonnegative quadratic form in the residuals.  With
``a = (K + n lam I)^{-1} eps`` the identity ``K a = eps - n lam a`` lets all
of them be evaluated from one factorized solve, without multiplying by K:

* ``proj1`` = ``n * sum_r a_r' K a_r``            (squared RKHS norm of w-hat)
* ``proj2`` = ``sum_r eps_r' K a_r``              (inner product with m-hat)
* ``rand1`` = ``n * sum_r sum_j (eps_r' c_j)^2``  with ``c_j = (K+n lam I)^{-1} k(v_j)``
* ``rand2`` = ``n * sum_r (sum_j eps_r' c_j)^2``
* ``kcm``   = ``(1/n) sum_r eps_r' K eps_r``      (ICM/GP benchmark form)

Multi-component residuals (q > 1) are aggregated by plain summation over
components.  The batched evaluator powers the bootstrap: one column per
replicate, shared factorization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .spectral import KernelContext

STATISTIC_NAMES = ("proj1", "proj2", "rand1", "rand2", "kcm", "gp")
RAND_STATISTICS = ("rand1", "rand2")


@dataclass(frozen=True)
class LocationSet:
    """Random evaluation points, fixed for one whole test invocation.

    The same points are used by the observed statistic and every bootstrap
    replicate; resampling them per replicate would change the limiting law
    the bootstrap is meant to reproduce.
    """

    points: np.ndarray
    provenance: dict

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise InputError(f"locations must be a J x d matrix with J >= 1, got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InputError("locations contain non-finite entries")

    @property
    def J(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class StatValue:
    """A named statistic value plus the scale it was computed at."""

    name: str
    value: float
    scale: dict

    def __post_init__(self) -> None:
        if self.name not in STATISTIC_NAMES:
            raise InputError(f"unknown statistic {self.name!r}")
        if self.value < 0:
            raise InputError(f"statistic {self.name} is negative: {self.value}")


def fit_location_sampler(X, ridge: float = 1e-8):
    """Sample mean and ridged sample covariance of the covariates.

    The ridge ``ridge * (trace/d)`` on the diagonal keeps the covariance
    factorizable with binary covariates; a zero-spread sample falls back to
    ``1e-8 * I``.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    n, d = X.shape
    if n < 2:
        raise InputError("location sampler needs at least two observations")
    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (n - 1)
    trace = float(np.trace(cov))
    bump = ridge * (trace / d) if trace > 0 else 1e-8
    cov = cov + bump * np.eye(d)
    return mean, cov


def sample_locations(sampler, J: int, seed) -> LocationSet:
    """Draw J i.i.d. points from the fitted normal, deterministically in seed.

    If the covariance does not factorize, sampling falls back to its
    diagonal; the provenance records which path was taken.
    """
    mean, cov = sampler
    if J < 1:
        raise InputError(f"J must be >= 1, got {J}")
    mean = np.asarray(mean, dtype=np.float64)
    cov = np.asarray(cov, dtype=np.float64)
    fallback = False
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        L = np.diag(np.sqrt(np.clip(np.diag(cov), 0.0, None)))
        fallback = True
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((J, mean.shape[0]))
    points = mean + Z @ L.T
    return LocationSet(
        points=points,
        provenance={
            "mean": mean,
            "covariance": cov,
            "seed": seed,
            "diagonal_fallback": fallback,
        },
    )


def _as_components(eps) -> np.ndarray:
    eps = np.asarray(eps, dtype=np.float64)
    if eps.ndim == 1:
        eps = eps[:, None]
    if eps.ndim != 2:
        raise InputError(f"residuals must be a vector or n x q matrix, got {eps.shape}")
    return eps


def batched_statistic(name: str, comps, ctx: KernelContext | None, kV=None, K=None) -> np.ndarray:
    """Statistic values for a batch of residual draws.

    ``comps`` is a list over residual components of ``(n, B)`` arrays whose
    columns are residual vectors (B = 1 reproduces the scalar statistics).
    ``kV`` is the n x J cross-kernel at the invocation's fixed locations;
    ``K`` overrides the kernel matrix for ``kcm``-form statistics evaluated
    outside a factorized context (the fixed-bandwidth ICM benchmark).
    """
    if name in ("kcm", "gp"):
        Kmat = K if K is not None else (ctx.K if ctx is not None else None)
        if Kmat is None:
            raise InputError("kcm-form statistics need a kernel matrix")
        n = Kmat.shape[0]
        vals = None
        for E in comps:
            v = np.einsum("nb,nb->b", E, Kmat @ E) / n
            vals = v if vals is None else vals + v
        return vals
    if ctx is None:
        raise InputError(f"statistic {name!r} needs a KernelContext")
    n = ctx.K.shape[0]
    ridge = ctx.fact.ridge
    vals = None
    for E in comps:
        if E.shape[0] != n:
            raise InputError(f"residual length {E.shape[0]} does not match kernel size {n}")
        A = ctx.fact.solve(E)
        if name == "proj1":
            KA = E - ridge * A
            v = n * np.einsum("nb,nb->b", A, KA)
        elif name == "proj2":
            KA = E - ridge * A
            v = np.einsum("nb,nb->b", E, KA)
        elif name in RAND_STATISTICS:
            if kV is None:
                raise InputError(f"statistic {name!r} needs cross-kernel columns kV")
            M = kV.T @ A  # (J, B)
            v = n * (M**2).sum(axis=0) if name == "rand1" else n * M.sum(axis=0) ** 2
        else:
            raise InputError(f"unknown statistic {name!r}")
        vals = v if vals is None else vals + v
    # roundoff can leave a tiny negative where the exact value is zero
    return np.maximum(vals, 0.0)


def _scalar(name: str, eps, ctx: KernelContext | None, kV=None, K=None) -> StatValue:
    eps = _as_components(eps)
    comps = [eps[:, r][:, None] for r in range(eps.shape[1])]
    value = float(batched_statistic(name, comps, ctx, kV=kV, K=K)[0])
    n = (ctx.K if ctx is not None else K).shape[0]
    scale = {"n": n}
    if ctx is not None:
        scale["lambda"] = ctx.lam
        scale["gamma"] = ctx.config.gamma
    if kV is not None:
        scale["J"] = kV.shape[1]
    return StatValue(name=name, value=value, scale=scale)


def stat_proj1(eps_perp, ctx: KernelContext) -> StatValue:
    """``n * sum_r eps_r' (K+n lam I)^{-1} K (K+n lam I)^{-1} eps_r``."""
    return _scalar("proj1", eps_perp, ctx)


def stat_proj2(eps_perp, ctx: KernelContext) -> StatValue:
    """``sum_r eps_r' (K+n lam I)^{-1} K eps_r`` (the display already carries n)."""
    return _scalar("proj2", eps_perp, ctx)


def stat_rand1(eps_perp, ctx: KernelContext, kV) -> StatValue:
    """``n * sum_r sum_j (eps_r' (K+n lam I)^{-1} k(v_j))^2``."""
    kV = np.asarray(kV, dtype=np.float64)
    if kV.ndim != 2 or kV.shape[1] < 1:
        raise InputError("kV must be an n x J matrix with J >= 1")
    return _scalar("rand1", eps_perp, ctx, kV=kV)


def stat_rand2(eps_perp, ctx: KernelContext, kV) -> StatValue:
    """``n * sum_r (sum_j eps_r' (K+n lam I)^{-1} k(v_j))^2``.

    Cauchy-Schwarz gives ``rand2 <= J * rand1``; J = 1 makes them equal.
    """
    kV = np.asarray(kV, dtype=np.float64)
    if kV.ndim != 2 or kV.shape[1] < 1:
        raise InputError("kV must be an n x J matrix with J >= 1")
    return _scalar("rand2", eps_perp, ctx, kV=kV)


def stat_kcm(eps, K, gamma: float | None = None) -> StatValue:
    """``(1/n) sum_r eps_r' K eps_r``, the ICM/GP benchmark quadratic form.

    The ICM benchmark fixes gamma = 0.5; the GP benchmark uses the median
    heuristic and projected residuals (algebraically identical to the
    modified orthogonal kernel Pi' K Pi applied to raw residuals).
    """
    K = np.asarray(K, dtype=np.float64)
    sv = _scalar("kcm", eps, None, K=K)
    if gamma is not None:
        sv.scale["gamma"] = gamma
    return sv
