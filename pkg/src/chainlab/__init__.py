"""Verification lab for eigenvalue tail bounds of matrix observables on
time-inhomogeneous Markov chains."""

__version__ = "0.1.0"

from .bounds import (  # noqa: F401
    BoundParams,
    BoundResult,
    bound_curv,
    bound_curv_diam,
    bound_ollivier_avg,
    bound_ollivier_point,
    bound_spec,
    elo_avg_bound,
    elo_point_bound,
    invert_for_n,
)
from .chain import (  # noqa: F401
    FiniteMarkovModel,
    FiniteMetricSpace,
    ObservableSequence,
    Trajectory,
    centered_sum,
    exact_mean,
    exact_means,
    granularity,
    lipschitz_op,
    oscillation_frob,
    oscillation_op,
    propagate,
    sample_trajectory,
)
from .dyadic import halving_grid_model, halving_pair_kappa, tightness_experiment  # noqa: F401
from .elo import (  # noqa: F401
    EloConfig,
    EnvDynamics,
    EnvironmentState,
    btl_outcome,
    drift_estimate,
    elo_curvature,
    elo_step,
    laplacian_lambda,
    project_zero_sum_box,
    run_tracking,
)
from .errors import (  # noqa: F401
    ChainLabError,
    ConfigError,
    EnumerationError,
    HorizonError,
    NumericalError,
    VerificationError,
)
from .hermitian import (  # noqa: F401
    dilation,
    expm_scaled,
    frobenius_norm,
    lambda_max,
    op_norm,
    trace_exp,
)
from .lemmas import verify_lemma_suite  # noqa: F401
from .renewal import exact_an, renewal_coefficients, verify_renewal  # noqa: F401
from .rng import stream  # noqa: F401
from .spectral import effective_lambda, sigma_profile, sigma_t  # noqa: F401
from .tails import (  # noqa: F401
    TailEstimate,
    clopper_pearson,
    dominance_table,
    empirical_tail,
    exact_tail_enumeration,
    summarize_chain,
)
from .transport import (  # noqa: F401
    CurvatureProfile,
    TransportPlan,
    effective_kappa,
    effective_kappa_tilde,
    kappa_profile,
    ollivier_kappa,
    tilted_sum,
    wasserstein1,
    wasserstein1_line,
)
from .verify import run_full_verification  # noqa: F401
