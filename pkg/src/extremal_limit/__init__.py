"""Numerical verification toolkit for log-scaled subordinators.

Small-time limits of ``-t log X_t`` for pure-jump subordinators, the
truncated extremal process they converge to, and the samplers, operators and
statistics needed to check that convergence numerically.
"""

__version__ = "0.1.0"

from .errors import DomainError, ModelInvalidError, QuadratureError
from .levy import (
    GammaModel,
    LevyModel,
    LogTailModel,
    StableModel,
    assess_profile,
    condition_S5_profile,
    condition_S6_profile,
    condition_S7_profile,
    gamma_marginal_cdf,
    laplace_exponent,
    make_model,
    rho,
    small_jump_mean,
    tail_mass,
)
from .rng import RngSpec
from .simulate import (
    GridSample,
    PathBatch,
    PiecewiseConstantPath,
    evaluate_path,
    log_scale,
    log_scale_path,
    sample_extremal_fidi,
    sample_extremal_markov,
    sample_gamma_on_grid,
    sample_truncated_subordinator,
)
from .analytic import (
    SmoothTestFunction,
    chapman_kolmogorov_gap,
    compact_bump,
    gaussian_bump,
    generator_A,
    generator_B_t,
    semigroup_T,
    uniform_gap,
)
from .stats import (
    SweepResult,
    exact_marginal_gap,
    extremal_joint_survival,
    fidi_convergence_experiment,
    ks_statistic,
    marginal_limit_sweep,
)
from .skorohod import j1_distance, sup_distance
