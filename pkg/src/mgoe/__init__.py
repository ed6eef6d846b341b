"""Spectral statistics of the mixed Gaussian Orthogonal Ensemble (mGOE)."""

__version__ = "0.1.0"

from .eigen import eigenvalues_symmetric, trace
from .exceptions import (
    ConfigurationError,
    ContractError,
    MGOEError,
    NumericalError,
    OutputError,
)
from .experiment import (
    ExperimentPlan,
    FixedMuResult,
    SweepResult,
    poisson_baseline,
    run_fixed_mu,
    run_sweep,
)
from .processing import (
    UnfoldedSpectrum,
    cumulative_staircase,
    normalize_scale,
    periodic_extend,
    select_unfolding_degree,
    truncate_outliers,
    unfold,
)
from .sampling import (
    Ensemble,
    EnsembleConfig,
    draw_gaussian_matrix,
    draw_mixture_sizes,
    sample_goe,
    sample_mgoe,
)
from .statistics import (
    R_GOE,
    R_POISSON,
    GapRatioResult,
    HistogramWithCI,
    bimodality_gap,
    bootstrap_ci,
    density_histogram,
    gap_ratios,
    mean_gap_ratio,
    nn_spacings,
    poisson_spacing_density,
    semicircle_density,
    wigner_surmise_density,
)
