"""End-to-end experiments: fixed-mu diagnostics, mu sweeps, Poisson baseline.

Work is split per ensemble member and may run on a thread pool; results are
always reduced in member-index order, so output does not depend on the
number of workers. Matrices are diagonalized as soon as they are drawn and
never held for the whole ensemble.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ._validation import (
    check_level,
    check_mixture,
    check_positive_float,
    check_positive_int,
)
from .eigen import eigenvalues_symmetric
from .exceptions import ConfigurationError, MGOEError, NumericalError
from .processing import (
    DEFAULT_DEGREES,
    DEFAULT_EXTENSION,
    DEFAULT_FENCE_K,
    EXTENSION_SCHEMES,
    normalize_scale,
    periodic_extend,
    select_unfolding_degree,
    truncate_outliers,
)
from .sampling import (
    BASELINE_STREAM,
    BOOTSTRAP_STREAM,
    EnsembleConfig,
    derive_rng,
    sample_member,
    sample_sizes,
)
from .statistics import (
    R_GOE,
    R_POISSON,
    ZERO_CONVENTIONS,
    GapRatioResult,
    HistogramWithCI,
    bimodality_ci,
    bimodality_gap,
    bootstrap_indices,
    gap_ratio_result,
    histogram_with_ci,
    least_squares_slope,
    nn_spacings,
    uniform_edges,
)

ANALYSES = ("density", "nnsd", "gap_ratio")
DEFAULT_MU_GRID = tuple(round(0.50 + 0.02 * k, 10) for k in range(26))


@dataclass(frozen=True)
class ExperimentPlan:
    """Everything that determines an experiment's output.

    Worker counts are deliberately absent: they never change results.
    """

    N: int
    M: int = 100
    sigma: float = 1.0
    seed: int = 0
    mu_grid: tuple = DEFAULT_MU_GRID
    analyses: tuple = ANALYSES
    n_resamples: int = 1000
    level: float = 0.95
    density_bins: int = 50
    density_range: tuple = None  # None: 0.5th-99.5th percentile of pooled values
    nnsd_bins: int = 40
    nnsd_range: tuple = (0.0, 4.0)
    gap_bins: int = 40
    gap_range: tuple = (0.0, 1.0)
    gap_density_pooled: bool = False
    fence_k: float = DEFAULT_FENCE_K  # None disables truncation
    degrees: tuple = DEFAULT_DEGREES
    gap_zero_convention: str = "keep"
    extension: str = DEFAULT_EXTENSION

    def __post_init__(self):
        check_positive_int(self.N, "N", minimum=3)
        check_positive_int(self.M, "M")
        check_positive_float(self.sigma, "sigma")
        EnsembleConfig(N=self.N, M=self.M, sigma=self.sigma, seed=self.seed)
        grid = tuple(check_mixture(mu) for mu in self.mu_grid)
        if not grid:
            raise ConfigurationError("mu_grid must not be empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigurationError("mu_grid must be strictly increasing")
        object.__setattr__(self, "mu_grid", grid)
        unknown = set(self.analyses) - set(ANALYSES)
        if unknown:
            raise ConfigurationError(f"unknown analyses {sorted(unknown)}; expected {ANALYSES}")
        object.__setattr__(self, "analyses", tuple(a for a in ANALYSES if a in self.analyses))
        check_positive_int(self.n_resamples, "bootstrap resamples")
        check_level(self.level)
        for name in ("density_bins", "nnsd_bins", "gap_bins"):
            check_positive_int(getattr(self, name), name)
        for name in ("density_range", "nnsd_range", "gap_range"):
            rng = getattr(self, name)
            if rng is not None:
                if len(rng) != 2 or not float(rng[0]) < float(rng[1]):
                    raise ConfigurationError(f"{name} must be [low, high] with low < high")
                object.__setattr__(self, name, (float(rng[0]), float(rng[1])))
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "level", float(self.level))
        if self.fence_k is not None:
            if not float(self.fence_k) >= 0:
                raise ConfigurationError(f"fence_k must be non-negative, got {self.fence_k}")
            fence_k = None if np.isinf(self.fence_k) else float(self.fence_k)
            object.__setattr__(self, "fence_k", fence_k)
        degrees = tuple(check_positive_int(d, "degree") for d in self.degrees)
        if not degrees:
            raise ConfigurationError("at least one unfolding degree is required")
        object.__setattr__(self, "degrees", degrees)
        if self.gap_zero_convention not in ZERO_CONVENTIONS:
            raise ConfigurationError(
                f"gap_zero_convention must be one of {ZERO_CONVENTIONS}, got {self.gap_zero_convention!r}"
            )
        if self.extension not in EXTENSION_SCHEMES:
            raise ConfigurationError(
                f"extension must be one of {EXTENSION_SCHEMES}, got {self.extension!r}"
            )

    def ensemble_config(self, mu):
        return EnsembleConfig(N=self.N, M=self.M, mu=mu, sigma=self.sigma, seed=self.seed)


@dataclass
class FixedMuResult:
    mu: float
    sizes: tuple
    density: HistogramWithCI = None
    nnsd: HistogramWithCI = None
    gap: GapRatioResult = None
    gap_density: HistogramWithCI = None
    bimodality: tuple = None  # (gap, ci_low, ci_high, unimodal)
    degrees_used: list = None
    mean_spacings: list = None
    kept_fraction: list = None
    spectra: list = field(default=None, repr=False)
    spacings: list = field(default=None, repr=False)


@dataclass
class SweepResult:
    mu: list
    mean_r: list
    ci_low: list
    ci_high: list
    r_poisson: float = R_POISSON
    r_goe: float = R_GOE
    slope: float = float("nan")
    errors: dict = field(default_factory=dict)


def _map(func, items, n_jobs):
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(func, items))
    return [func(item) for item in items]


def member_spectra(config, n_jobs=1):
    """Sizes and raw sorted spectra of every ensemble member."""
    sizes = sample_sizes(config)

    def spectrum(i):
        try:
            return eigenvalues_symmetric(sample_member(config, i, sizes[i]))
        except NumericalError as exc:
            raise NumericalError(f"member {i}: {exc}", order=exc.order, member=i) from exc

    return tuple(sizes), _map(spectrum, range(config.M), n_jobs)


def _process_member(raw, plan, need_unfold):
    extended = periodic_extend(raw, plan.N, plan.extension)
    truncated = truncate_outliers(extended, plan.fence_k)
    out = {
        "extended": extended,
        "kept_fraction": truncated.size / extended.size,
        "scaled": normalize_scale(truncated, plan.sigma, raw.size),
    }
    if need_unfold:
        degree, unfolded = select_unfolding_degree(truncated, plan.degrees, out["kept_fraction"])
        out["degree"] = degree
        out["mean_spacing"] = unfolded.mean_spacing
        out["spacings"] = nn_spacings(unfolded)
    return out


def run_fixed_mu(plan, mu, n_jobs=1, keep_spectra=False):
    """Sample mGOE at ``mu`` and compute the plan's diagnostics with CIs."""
    config = plan.ensemble_config(mu)
    sizes, spectra = member_spectra(config, n_jobs)
    need_unfold = "nnsd" in plan.analyses

    def process(i):
        try:
            return _process_member(spectra[i], plan, need_unfold)
        except NumericalError as exc:
            raise NumericalError(
                f"member {i}: {exc}", order=exc.order, degree=exc.degree, member=i
            ) from exc

    members = _map(process, range(config.M), n_jobs)
    indices = bootstrap_indices(
        config.M, plan.n_resamples, derive_rng(plan.seed, config.mu, BOOTSTRAP_STREAM)
    )
    result = FixedMuResult(
        mu=config.mu,
        sizes=sizes,
        kept_fraction=[m["kept_fraction"] for m in members],
        spectra=spectra if keep_spectra else None,
    )
    if "density" in plan.analyses:
        scaled = [m["scaled"] for m in members]
        if plan.density_range is None:
            low, high = np.percentile(np.concatenate(scaled), [0.5, 99.5])
        else:
            low, high = plan.density_range
        edges = uniform_edges(low, high, plan.density_bins)
        result.density = histogram_with_ci(scaled, edges, level=plan.level, indices=indices)
        gap, unimodal = bimodality_gap(result.density)
        lo, hi = bimodality_ci(result.density, level=plan.level, indices=indices)
        result.bimodality = (gap, lo, hi, unimodal)
    if need_unfold:
        result.spacings = [m["spacings"] for m in members]
        result.degrees_used = [m["degree"] for m in members]
        result.mean_spacings = [m["mean_spacing"] for m in members]
        edges = uniform_edges(*plan.nnsd_range, plan.nnsd_bins)
        result.nnsd = histogram_with_ci(result.spacings, edges, level=plan.level, indices=indices)
    if "gap_ratio" in plan.analyses:
        result.gap = gap_ratio_result(
            [m["extended"] for m in members],
            plan.gap_zero_convention,
            level=plan.level,
            indices=indices,
        )
        edges = uniform_edges(*plan.gap_range, plan.gap_bins)
        result.gap_density = histogram_with_ci(
            result.gap.ratios,
            edges,
            level=plan.level,
            indices=indices,
            pooled=plan.gap_density_pooled,
        )
    return result


def run_sweep(plan, n_jobs=1):
    """Mean gap ratio with bootstrap CI at every mu of the plan's grid.

    A failing grid point is recorded in ``errors`` and skipped.
    """
    gap_plan = replace(plan, analyses=("gap_ratio",))
    out = SweepResult(mu=[], mean_r=[], ci_low=[], ci_high=[])
    for mu in plan.mu_grid:
        try:
            gap = run_fixed_mu(gap_plan, mu, n_jobs).gap
        except MGOEError as exc:
            out.errors[mu] = f"{exc.category}: {exc}"
            continue
        out.mu.append(mu)
        out.mean_r.append(gap.mean_r)
        out.ci_low.append(gap.ci[0])
        out.ci_high.append(gap.ci[1])
    out.slope = least_squares_slope(out.mu, out.mean_r)
    return out


def poisson_baseline(
    n_levels,
    M,
    seed=0,
    spacing="exponential",
    zero_convention="keep",
    n_resamples=1000,
    level=0.95,
):
    """Gap ratios of synthetic spectra with independent unit-mean spacings.

    ``spacing="equal"`` replaces the exponential spacings by a picket fence.
    """
    n_levels = check_positive_int(n_levels, "n_levels", minimum=3)
    M = check_positive_int(M, "M")
    if spacing not in ("exponential", "equal"):
        raise ConfigurationError(f"spacing must be 'exponential' or 'equal', got {spacing!r}")
    spectra = []
    for i in range(M):
        if spacing == "equal":
            gaps = np.ones(n_levels - 1)
        else:
            gaps = derive_rng(seed, 0.0, BASELINE_STREAM, i).exponential(1.0, n_levels - 1)
        spectra.append(np.concatenate([[0.0], np.cumsum(gaps)]))
    rng = derive_rng(seed, 0.0, BOOTSTRAP_STREAM)
    return gap_ratio_result(spectra, zero_convention, n_resamples, level, rng=rng)
