"""rmtails: gap probabilities and large-deviation tails of the largest
eigenvalue for Hermitian random matrix ensembles with polynomial potentials."""

__version__ = "0.1.0"

from .potentials import (
    Polynomial,
    PotentialSpec,
    SaddleSet,
    count_real_roots,
    derivative,
    gaussian_potential,
    multicritical_potential,
    saddle_points,
    sturm_chain,
)
from .spectral_curve import (
    EffectiveAction,
    OneCutError,
    OneCutSolution,
    TailResult,
    density,
    instanton_action,
    right_tail_log_prob,
    right_tail_with_landscape,
    solve_one_cut,
    y_curve,
)
from .rate_functions import (
    LeftTailPlanarState,
    edge_exponent,
    gaussian_action,
    gaussian_left_F,
    hard_wall_states,
    k1_string_residuals,
    left_tail_general,
    multicritical_action,
    psi_minus,
    psi_plus,
)
from .orthopoly import (
    GapResult,
    PrecisionError,
    RecurrenceTable,
    TruncatedWeight,
    hankel_log_gap,
    log_gap_probability,
    recurrence_coefficients,
    string_residuals,
)
from .montecarlo import (
    GasState,
    SamplerConfig,
    empirical_density,
    lambda_max_stats,
    sample,
    sample_chains,
)
