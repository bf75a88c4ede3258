"""Data-generating processes and the Monte Carlo size/power harness.

Each replication derives its own seed tree from the experiment's master seed
via ``SeedSequence(master_seed, spawn_key=(rep,))``, then splits it into
disjoint substreams for data generation, tuning folds, location sampling,
and the bootstrap.  Replications are therefore independent of execution
order and worker count, and outer replications can run in parallel.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from .bootstrap import BootstrapPlan, multiplier_bootstrap, wild_bootstrap_icm
from .errors import InputError
from .kernels import KernelConfig, kernel_matrix, median_heuristic
from .models import Dataset, fit_ols
from .spectral import kernel_context
from .stats import RAND_STATISTICS, fit_location_sampler, sample_locations
from .tuning import tune_for_test

DGP_IDS = (
    "dgp0",
    "dgp1",
    "dgp2",
    "dgp3",
    "dgp4",
    "dgp5",
    "dgp6",
    "dgp5_star",
    "dgp6_star",
    "fig1_dgp0",
    "fig1_dgp1",
    "fig1_dgp2",
)

CELL_STATISTICS = ("proj1", "proj2", "rand1", "rand2", "gp", "icm")
_KRR_STATISTICS = ("proj1", "proj2", "rand1", "rand2")


@dataclass(frozen=True)
class DgpSpec:
    """One data-generating process instance: id, sample size, dimension, seed."""

    id: str
    n: int
    d: int
    seed: object = None

    def __post_init__(self) -> None:
        if self.id not in DGP_IDS:
            raise InputError(f"unknown DGP id {self.id!r}")
        if self.n < 1:
            raise InputError(f"n must be >= 1, got {self.n}")
        required = {"dgp5": 10, "dgp6": 10, "dgp5_star": 20, "dgp6_star": 20,
                    "fig1_dgp0": 2, "fig1_dgp1": 2, "fig1_dgp2": 2}
        want = required.get(self.id)
        if want is not None and self.d != want:
            raise InputError(f"{self.id} requires d={want}, got d={self.d}")
        if want is None and self.d < 1:
            raise InputError(f"d must be >= 1, got {self.d}")


def _heteroskedastic_covariates(rng, n: int, d: int, uniform_highs, normal_sds):
    # uniform block first, then the normal block; the noise e is drawn last
    U = rng.random((n, len(uniform_highs))) * np.asarray(uniform_highs)
    Z = rng.standard_normal((n, len(normal_sds))) * np.asarray(normal_sds)
    X = np.hstack([U, Z])
    assert X.shape[1] == d
    return X


def generate(spec: DgpSpec) -> Dataset:
    """Draw one sample (Y, X) from the requested process.

    Covariates are drawn before the error term, so a stubbed generator can
    zero out the noise to expose the mean function exactly.
    """
    seed = spec.seed
    rng = seed if hasattr(seed, "standard_normal") else np.random.default_rng(seed)
    n, d = spec.n, spec.d

    if spec.id in ("dgp0", "dgp1", "dgp2", "dgp3", "dgp4"):
        X = rng.standard_normal((n, d))
        e = rng.standard_normal(n)
        beta = np.full(d, 0.5)
        xb = X @ beta
        if spec.id == "dgp0":
            Y = 1.0 + xb + e
        elif spec.id == "dgp1":
            Y = 1.0 + xb + 1.5 * np.exp(-(xb**2)) + e
        elif spec.id == "dgp2":
            Y = 1.0 + xb + 2.0 * np.cos(1.2 * np.sqrt(np.sum(X**2, axis=1))) + e
        elif spec.id == "dgp3":
            Y = 1.0 + xb + 0.5 * xb**2 + e
        else:  # dgp4
            Y = 1.0 + xb + 1.5 * np.exp(0.25 * xb) + e
        return Dataset(X=X, Y=Y)

    if spec.id in ("dgp5", "dgp5_star"):
        half = d // 2
        highs = [1.0 + 0.1 * (l - 1) for l in range(1, half + 1)]
        sds = [1.0 + 0.1 * l for l in range(1, half + 1)]
        X = _heteroskedastic_covariates(rng, n, d, highs, sds)
        e = rng.standard_normal(n)
        xb = X.sum(axis=1)  # beta is a vector of ones
        Y = 1.0 + xb + np.sqrt(np.sum(X**2, axis=1)) + np.abs(xb) * e
        return Dataset(X=X, Y=Y)

    if spec.id in ("dgp6", "dgp6_star"):
        half = d // 2
        highs = [float(l) for l in range(1, half + 1)]
        sds = [1.0 + 0.1 * l for l in range(1, half + 1)]
        X = _heteroskedastic_covariates(rng, n, d, highs, sds)
        e = rng.standard_normal(n)
        xb = X.sum(axis=1)
        drift = np.sqrt(np.sum(X**2, axis=1)) / np.sqrt(n)
        # variance function: level terms over the first five covariates only,
        # squared terms over every covariate from the sixth on
        sd = np.sqrt(0.1 + X[:, :5].sum(axis=1) + np.sum(X[:, 5:] ** 2, axis=1))
        Y = 1.0 + xb + drift + sd * e
        return Dataset(X=X, Y=Y)

    # fig1 family: d = 2, unit coefficients, no intercept
    X = rng.standard_normal((n, 2))
    e = rng.standard_normal(n)
    xb = X.sum(axis=1)
    if spec.id == "fig1_dgp0":
        Y = xb + e
    elif spec.id == "fig1_dgp1":
        Y = xb + 4.5 * xb**2 + e
    else:  # fig1_dgp2
        Y = xb + 4.5 * np.exp(-(xb**2)) + e
    return Dataset(X=X, Y=Y)


def fig1_true_residuals(ds: Dataset) -> np.ndarray:
    """Residuals of the fig1 null model (known unit coefficients, no intercept)."""
    return ds.Y - ds.X.sum(axis=1)


@dataclass(frozen=True)
class ExperimentSpec:
    """One Monte Carlo cell: DGP, statistics, replication counts, seeds."""

    dgp: DgpSpec
    statistics: tuple = _KRR_STATISTICS
    R: int = 200
    B: int = 199
    J: int = 3
    level: float = 0.05
    master_seed: int = 0

    def __post_init__(self) -> None:
        if self.R < 1 or self.B < 1 or self.J < 1:
            raise InputError("R, B, J must all be >= 1")
        if not 0.0 < self.level < 1.0:
            raise InputError(f"level must be in (0, 1), got {self.level}")
        unknown = [s for s in self.statistics if s not in CELL_STATISTICS]
        if unknown:
            raise InputError(f"unknown statistics {unknown}; valid: {CELL_STATISTICS}")


@dataclass(frozen=True)
class CellResult:
    """Rejection proportions with Monte Carlo standard errors and raw p-values."""

    spec: ExperimentSpec
    rejection: dict
    mcse: dict
    p_values: dict


def _seed_int(ss: np.random.SeedSequence) -> int:
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _replication_pvalues(spec: ExperimentSpec, rep: int) -> dict:
    """All requested p-values for outer replication `rep`."""
    ss = np.random.SeedSequence(spec.master_seed, spawn_key=(rep,))
    data_ss, tune_ss, loc_ss, boot_ss = ss.spawn(4)

    ds = generate(replace(spec.dgp, seed=data_ss))
    fm = fit_ols(ds.X, ds.Y)

    out: dict = {}
    krr = [s for s in spec.statistics if s in _KRR_STATISTICS]
    needs_gp = "gp" in spec.statistics
    if krr or needs_gp:
        ctx = None
        if krr:
            gamma, lam, _ = tune_for_test(ds.X, fm.residuals, seed=_seed_int(tune_ss))
            ctx = kernel_context(KernelConfig(gamma=gamma), ds.X, lam)
        locations = None
        if any(s in RAND_STATISTICS for s in krr):
            sampler = fit_location_sampler(ds.X)
            locations = sample_locations(sampler, spec.J, _seed_int(loc_ss))
        gp_kernel = None
        gp_gamma = None
        if needs_gp:
            gp_gamma = median_heuristic(ds.X)
            gp_kernel = kernel_matrix(KernelConfig(gamma=gp_gamma), ds.X)
        plan = BootstrapPlan(B=spec.B, master_seed=_seed_int(boot_ss))
        names = krr + (["gp"] if needs_gp else [])
        reports = multiplier_bootstrap(
            fm,
            ctx,
            names,
            plan,
            locations=locations,
            gp_kernel=gp_kernel,
            gp_gamma=gp_gamma,
            keep_bootstrap_values=False,
        )
        for name in names:
            out[name] = reports[name].p_value
    if "icm" in spec.statistics:
        plan = BootstrapPlan(B=spec.B, master_seed=_seed_int(boot_ss))
        out["icm"] = wild_bootstrap_icm(ds.X, ds.Y, plan).p_value
    return out


def _worker(args) -> dict:
    spec, rep = args
    # single-threaded BLAS: faster at these matrix sizes, and replication
    # results cannot depend on the thread count of the hosting process
    with threadpool_limits(limits=1):
        return _replication_pvalues(spec, rep)


def run_cell(spec: ExperimentSpec, workers: int = 1) -> CellResult:
    """Monte Carlo rejection rates for one (DGP, n, d) cell.

    Results are aggregated by replication index, so any worker count yields
    the identical CellResult.
    """
    jobs = [(spec, rep) for rep in range(spec.R)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_worker, jobs, chunksize=max(1, spec.R // (4 * workers))))
    else:
        results = [_worker(j) for j in jobs]

    p_values = {
        name: np.array([res[name] for res in results]) for name in spec.statistics
    }
    rejection = {
        name: float(np.mean(p <= spec.level)) for name, p in p_values.items()
    }
    mcse = {
        name: float(np.sqrt(r * (1.0 - r) / spec.R)) for name, r in rejection.items()
    }
    return CellResult(spec=spec, rejection=rejection, mcse=mcse, p_values=p_values)


def run_power_vs_J(spec: ExperimentSpec, J_values, workers: int = 1) -> list:
    """Rejection rate of the random-location statistics as J varies.

    Returns rows ``(J, statistic, rejection, mcse)`` with J ascending; the
    master seed is shared across J so cells are paired on the same datasets.
    """
    J_values = sorted(set(int(j) for j in J_values))
    if not J_values:
        raise InputError("J_values is empty")
    if J_values[0] < 1 or J_values[-1] > 15:
        raise InputError(f"J values must lie in [1, 15], got {J_values}")
    rand_stats = tuple(s for s in spec.statistics if s in RAND_STATISTICS)
    if not rand_stats:
        raise InputError("power-vs-J needs rand1 and/or rand2 in the statistics")
    rows = []
    for J in J_values:
        cell = run_cell(replace(spec, J=J, statistics=rand_stats), workers=workers)
        for name in rand_stats:
            rows.append((J, name, cell.rejection[name], cell.mcse[name]))
    return rows


def write_cell_csv(results, path) -> Path:
    """One row per (DGP, statistic): rejection rate and Monte Carlo s.e."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dgp", "n", "d", "statistic", "R", "B", "level",
                         "rejection_rate", "mc_stderr"])
        for cell in results:
            s = cell.spec
            for name in s.statistics:
                writer.writerow([
                    s.dgp.id, s.dgp.n, s.dgp.d, name, s.R, s.B,
                    format(s.level, ".17g"),
                    format(cell.rejection[name], ".17g"),
                    format(cell.mcse[name], ".17g"),
                ])
    return path


def write_power_vs_j_csv(rows, path) -> Path:
    """CSV with columns J, statistic, rejection_rate, mc_stderr; J ascending."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["J", "statistic", "rejection_rate", "mc_stderr"])
        for J, name, rate, se in rows:
            writer.writerow([J, name, format(rate, ".17g"), format(se, ".17g")])
    return path
