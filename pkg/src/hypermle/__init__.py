"""Spectral simulation and maximum likelihood estimation for damped stochastic wave-type equations."""

from .spectrum import (
    PowerLaw,
    ExpLaw,
    LogLaw,
    LogLogLaw,
    Constant,
    Explicit,
    SignedAlternating,
    SpectrumSpec,
    ModelParams,
    eigenvalues,
    lambda_mu,
    check_hyperbolic,
    verify_lower_bound_props,
    classify_algebraic,
    consistency_conditions,
    slowly_increasing_test,
    conditions_1_2,
)
from .fundamental import (
    characteristic_roots,
    fund_solution,
    m_func,
    v_func,
    mode_moments,
    covariance_u,
    predicted_moments,
    psi,
    psi_curve,
    upsilon,
)
from .simulate import (
    TimeGrid,
    ModeTrajectory,
    transition,
    simulate_mode,
    simulate_solution,
    ito_sum,
    mode_stream,
)
from .estimate import (
    Stats,
    EstimateResult,
    sufficient_statistics,
    mle,
    error_decomposition,
    estimate_from_trajectories,
)
from .montecarlo import (
    ExperimentConfig,
    run_replicates,
    run_consistency,
    run_normality,
    verify_lln,
    fit_growth,
    ks_statistic,
)

__version__ = "0.1.0"
