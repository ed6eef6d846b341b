"""Spectral diagnostics, reference laws and member-level bootstrap intervals."""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._validation import check_bin_edges, check_level, check_spectrum
from .exceptions import ConfigurationError, ContractError
from .processing import UnfoldedSpectrum

R_POISSON = 0.3860
R_GOE = 0.5295

ZERO_CONVENTIONS = ("keep", "drop")
DEFAULT_RESAMPLES = 1000
DEFAULT_LEVEL = 0.95


# --- reference laws -------------------------------------------------------


def wigner_surmise_density(s):
    """GOE spacing surmise ``(pi/2) s exp(-pi s^2 / 4)``; zero for ``s < 0``."""
    s = np.asarray(s, dtype=float)
    return np.where(s >= 0, 0.5 * np.pi * s * np.exp(-0.25 * np.pi * s * s), 0.0)


def wigner_surmise_cdf(s):
    s = np.asarray(s, dtype=float)
    return np.where(s >= 0, -np.expm1(-0.25 * np.pi * s * s), 0.0)


def poisson_spacing_density(s):
    s = np.asarray(s, dtype=float)
    return np.where(s >= 0, np.exp(-np.abs(s)), 0.0)


def poisson_spacing_cdf(s):
    s = np.asarray(s, dtype=float)
    return np.where(s >= 0, -np.expm1(-np.abs(s)), 0.0)


def semicircle_density(x):
    """Semicircle law on ``[-2, 2]``: ``sqrt(4 - x^2) / (2 pi)``."""
    x = np.asarray(x, dtype=float)
    return np.sqrt(np.clip(4.0 - x * x, 0.0, None)) / (2.0 * np.pi)


def semicircle_cdf(x):
    x = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
    return 0.5 + (x * np.sqrt(4.0 - x * x) / 4.0 + np.arcsin(x / 2.0)) / np.pi


def semicircle_bin_density(bin_edges):
    """Semicircle density averaged over each bin (the expected histogram)."""
    edges = check_bin_edges(bin_edges)
    return np.diff(semicircle_cdf(edges)) / np.diff(edges)


# --- spacings and gap ratios ----------------------------------------------


def nn_spacings(unfolded):
    """Nearest-neighbour spacings of a sorted (unfolded) spectrum."""
    if isinstance(unfolded, UnfoldedSpectrum):
        unfolded = unfolded.values
    values = check_spectrum(unfolded, min_length=2, name="unfolded")
    return np.diff(values)


def gap_ratios(spectrum, zero_convention="keep"):
    """Ratios ``min(d_i, d_{i-1}) / max(d_i, d_{i-1})`` of consecutive spacings.

    Degenerate levels give zero spacings. Under ``"keep"`` a pair with one
    zero spacing gives 0 and a pair of two zero spacings gives 1; ``"drop"``
    discards every pair containing a zero spacing.
    """
    if zero_convention not in ZERO_CONVENTIONS:
        raise ConfigurationError(
            f"unknown zero convention {zero_convention!r}; expected one of {ZERO_CONVENTIONS}"
        )
    values = check_spectrum(spectrum, min_length=3, name="spectrum")
    d = np.diff(values)
    lo = np.minimum(d[1:], d[:-1])
    hi = np.maximum(d[1:], d[:-1])
    if zero_convention == "drop":
        keep = lo > 0
        return lo[keep] / hi[keep]
    ratios = np.ones_like(hi)
    nz = hi > 0
    ratios[nz] = lo[nz] / hi[nz]
    return ratios


def mean_gap_ratio(ratios):
    """Arithmetic mean over the available pairs."""
    ratios = np.asarray(ratios, dtype=float)
    if ratios.size == 0:
        raise ContractError("mean gap ratio of an empty ratio list")
    return float(ratios.mean())


# --- histograms -----------------------------------------------------------


def density_histogram(values, bin_edges):
    """Histogram normalized to unit integral over ``bin_edges``.

    Values outside the edges are left out of the normalization.

    Returns
    -------
    density : ndarray of shape (B,)
    n_excluded : int
    """
    edges = check_bin_edges(bin_edges)
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise ContractError("density histogram needs at least one value")
    counts, _ = np.histogram(values, bins=edges)
    n_in = int(counts.sum())
    n_excluded = int(values.size - n_in)
    if n_in == 0:
        return np.zeros(edges.size - 1), n_excluded
    return counts / (n_in * np.diff(edges)), n_excluded


def uniform_edges(low, high, bins):
    if not high > low:
        raise ConfigurationError(f"histogram range must satisfy low < high, got ({low}, {high})")
    return np.linspace(float(low), float(high), int(bins) + 1)


# --- bootstrap ------------------------------------------------------------


def bootstrap_indices(M, n_resamples=DEFAULT_RESAMPLES, rng=None):
    """Member indices drawn with replacement, shape ``(n_resamples, M)``."""
    if n_resamples < 1:
        raise ConfigurationError(f"n_resamples must be >= 1, got {n_resamples}")
    rng = np.random.default_rng(rng)
    return rng.integers(0, M, size=(int(n_resamples), int(M)))


def percentile_interval(replicates, level=DEFAULT_LEVEL):
    level = check_level(level)
    alpha = (1.0 - level) / 2.0
    low, high = np.quantile(replicates, [alpha, 1.0 - alpha], axis=0, method="linear")
    return low, high


def bootstrap_ci(
    per_member,
    n_resamples=DEFAULT_RESAMPLES,
    level=DEFAULT_LEVEL,
    rng=None,
    statistic=None,
    indices=None,
):
    """Percentile bootstrap interval for the ensemble mean over members.

    Parameters
    ----------
    per_member : array of shape (M,) or (M, B)
        One statistic (or vector of statistics) per ensemble member.
    n_resamples, level :
        Number of bootstrap resamples and two-sided confidence level.
    rng : int, Generator or None
        Source of the resampling indices.
    statistic : callable, optional
        Applied to each resampled ensemble mean; defaults to the mean itself.
    indices : array, optional
        Precomputed resampling indices (see :func:`bootstrap_indices`), so
        several statistics can share the same resamples.

    Returns
    -------
    low, high : float or ndarray
    """
    level = check_level(level)
    stat = np.asarray(per_member, dtype=float)
    if stat.ndim == 0 or stat.shape[0] < 1:
        raise ContractError("bootstrap needs at least one member")
    if indices is None:
        indices = bootstrap_indices(stat.shape[0], n_resamples, rng)
    means = stat[indices].mean(axis=1)
    if statistic is not None:
        means = np.array([statistic(m) for m in means])
    low, high = percentile_interval(means, level)
    if np.ndim(low) == 0:
        return float(low), float(high)
    return low, high


@dataclass
class HistogramWithCI:
    bin_edges: np.ndarray
    density: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    n_excluded: int = 0
    per_member: np.ndarray = field(default=None, repr=False)

    @property
    def bin_centers(self):
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])


def histogram_with_ci(
    samples,
    bin_edges,
    n_resamples=DEFAULT_RESAMPLES,
    level=DEFAULT_LEVEL,
    rng=None,
    pooled=False,
    indices=None,
):
    """Ensemble density histogram with per-bin member bootstrap intervals.

    ``samples`` holds one array of values per member. By default each member
    contributes its own normalized histogram and the estimate is their mean;
    ``pooled=True`` instead normalizes the pooled counts.
    """
    edges = check_bin_edges(bin_edges)
    widths = np.diff(edges)
    counts = np.array([np.histogram(np.asarray(s, float), bins=edges)[0] for s in samples], float)
    totals = np.array([np.asarray(s).size for s in samples])
    n_in = counts.sum(axis=1)
    n_excluded = int(totals.sum() - n_in.sum())
    with np.errstate(invalid="ignore", divide="ignore"):
        per_member = np.where(n_in[:, None] > 0, counts / (n_in[:, None] * widths), 0.0)
    if indices is None:
        indices = bootstrap_indices(len(samples), n_resamples, rng)
    if pooled:
        density = counts.sum(axis=0) / (max(n_in.sum(), 1) * widths)
        reps = counts[indices].sum(axis=1) / (np.maximum(n_in[indices].sum(axis=1), 1)[:, None] * widths)
        low, high = percentile_interval(reps, level)
    else:
        density = per_member.mean(axis=0)
        low, high = bootstrap_ci(per_member, level=level, indices=indices)
    return HistogramWithCI(
        bin_edges=edges,
        density=density,
        ci_low=low,
        ci_high=high,
        n_excluded=n_excluded,
        per_member=per_member,
    )


@dataclass
class GapRatioResult:
    per_member_r: np.ndarray
    mean_r: float
    ci: tuple
    n_pairs_used: int
    ratios: list = field(default=None, repr=False)


def gap_ratio_result(
    spectra,
    zero_convention="keep",
    n_resamples=DEFAULT_RESAMPLES,
    level=DEFAULT_LEVEL,
    rng=None,
    indices=None,
):
    """Per-member mean gap ratios, their ensemble mean and bootstrap interval."""
    ratios = [gap_ratios(s, zero_convention) for s in spectra]
    per_member = np.array([mean_gap_ratio(r) for r in ratios])
    mean_r = float(per_member.mean())
    low, high = bootstrap_ci(per_member, n_resamples, level, rng=rng, indices=indices)
    return GapRatioResult(
        per_member_r=per_member,
        mean_r=mean_r,
        ci=(low, high),
        n_pairs_used=int(sum(r.size for r in ratios)),
        ratios=ratios,
    )


# --- shape ----------------------------------------------------------------


class BimodalityGap(NamedTuple):
    gap: float
    unimodal: bool


def bimodality_gap(hist):
    """Depth of the deepest valley between two peaks of a histogram.

    For every interior bin ``m`` the valley depth is
    ``min(max(density[:m]), max(density[m+1:])) - density[m]``, i.e. how far
    the lower of the two flanking peaks rises above the bin. The gap is the
    largest such depth. On a clean two-peaked histogram this is the lower
    peak minus the minimum between the peaks; unlike a pick of the two
    highest local maxima it is not fooled by bin-to-bin noise on one flank.
    A positive gap certifies an M shape; histograms without a valley
    (unimodal or monotone) give ``(0.0, True)``.
    """
    density = hist.density if isinstance(hist, HistogramWithCI) else hist
    density = np.asarray(density, dtype=float)
    if density.ndim != 1 or density.size < 3:
        raise ContractError("bimodality gap needs a histogram of at least 3 bins")
    left = np.maximum.accumulate(density)[:-2]
    right = np.maximum.accumulate(density[::-1])[::-1][2:]
    depth = float((np.minimum(left, right) - density[1:-1]).max())
    if depth <= 0:
        return BimodalityGap(0.0, True)
    return BimodalityGap(depth, False)


def bimodality_ci(hist, level=DEFAULT_LEVEL, indices=None, n_resamples=DEFAULT_RESAMPLES, rng=None):
    """Bootstrap interval of the bimodality gap of the member-mean histogram."""
    if hist.per_member is None:
        raise ContractError("histogram carries no per-member densities")
    return bootstrap_ci(
        hist.per_member,
        n_resamples,
        level,
        rng=rng,
        indices=indices,
        statistic=lambda d: bimodality_gap(d).gap,
    )


def ks_distance(sample, cdf):
    """Kolmogorov-Smirnov distance between a sample and a continuous CDF."""
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if n == 0:
        raise ContractError("KS distance of an empty sample")
    F = cdf(x)
    upper = np.arange(1, n + 1) / n - F
    lower = F - np.arange(n) / n
    return float(max(upper.max(), lower.max()))


def least_squares_slope(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        return math.nan
    return float(np.polyfit(x, y, 1)[0])
