"""Reproducing-kernel model checks for conditional moment restriction models.

Kernel ridge regression of estimated residuals on kernel features yields a
coefficient function that vanishes exactly when the model is correctly
specified.  This package implements four test statistics built on that
function (two RKHS projections, two random-location evaluations), a
Neyman-orthogonal projection that removes nuisance-estimation effects, a
multiplier bootstrap for inference, and the Monte Carlo harness and data
ingestion around them.
"""

__version__ = "0.1.0"

from .bootstrap import (
    BootstrapPlan,
    TestReport,
    bootstrap_test,
    mammen_multipliers,
    multiplier_bootstrap,
    wild_bootstrap_icm,
)
from .errors import EstimationError, InputError, KrrCheckError, NumericalError
from .kernels import (
    KernelConfig,
    kernel_cross,
    kernel_eval,
    kernel_matrix,
    median_heuristic,
)
from .models import (
    Dataset,
    FittedModel,
    fit_ols,
    fit_probit,
    joint_cate_residuals,
    known_theta_model,
)
from .orthogonal import Projector, build_projector, orthogonalize_residuals
from .simulate import (
    DgpSpec,
    ExperimentSpec,
    generate,
    run_cell,
    run_power_vs_J,
)
from .spectral import (
    EigenSystem,
    KernelContext,
    RegularizedFactorization,
    eigendecompose,
    gaussian_measure_spectrum_oracle,
    kernel_context,
    reg_solve,
    spectral_statistic,
)
from .stats import (
    LocationSet,
    StatValue,
    fit_location_sampler,
    sample_locations,
    stat_kcm,
    stat_proj1,
    stat_proj2,
    stat_rand1,
    stat_rand2,
)
from .tuning import TuneGrid, default_grid, tune, tune_informative
from .witness import WitnessField, krr_alpha, witness_eval, witness_field, witness_grid_export

__all__ = [
    "BootstrapPlan",
    "Dataset",
    "DgpSpec",
    "EigenSystem",
    "EstimationError",
    "ExperimentSpec",
    "FittedModel",
    "InputError",
    "KernelConfig",
    "KernelContext",
    "KrrCheckError",
    "LocationSet",
    "NumericalError",
    "Projector",
    "RegularizedFactorization",
    "StatValue",
    "TestReport",
    "TuneGrid",
    "WitnessField",
    "bootstrap_test",
    "build_projector",
    "default_grid",
    "eigendecompose",
    "fit_location_sampler",
    "fit_ols",
    "fit_probit",
    "gaussian_measure_spectrum_oracle",
    "generate",
    "joint_cate_residuals",
    "kernel_context",
    "kernel_cross",
    "kernel_eval",
    "kernel_matrix",
    "known_theta_model",
    "krr_alpha",
    "mammen_multipliers",
    "median_heuristic",
    "multiplier_bootstrap",
    "orthogonalize_residuals",
    "reg_solve",
    "run_cell",
    "run_power_vs_J",
    "sample_locations",
    "spectral_statistic",
    "stat_kcm",
    "stat_proj1",
    "stat_proj2",
    "stat_rand1",
    "stat_rand2",
    "tune",
    "tune_informative",
    "wild_bootstrap_icm",
    "witness_eval",
    "witness_field",
    "witness_grid_export",
]
