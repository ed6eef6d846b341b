"""Turning raw member spectra into analysis-ready spectra.

The pipeline per member is: periodic extension to the base size ``N``,
Tukey-fence outlier truncation, and either scale normalization (for the
density) or polynomial unfolding (for spacing statistics).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from ._validation import check_positive_float, check_positive_int, check_spectrum
from .exceptions import ConfigurationError, ContractError, NumericalError

EXTENSION_SCHEMES = ("centered", "cyclic")
DEFAULT_EXTENSION = "centered"
DEFAULT_FENCE_K = 1.5
DEFAULT_DEGREES = (3, 5, 7, 9, 11)

# Candidates whose |mean_spacing - 1| differ by less than this are tied.
TIE_TOLERANCE = 1e-12


def periodic_extend(raw, N, scheme=DEFAULT_EXTENSION):
    """Extend a sorted spectrum of ``n <= N`` levels to exactly ``N`` levels.

    The sorted levels are treated as periodic and a contiguous window of
    ``N`` indices is read off cyclically, so every level appears
    ``floor(N/n)`` or ``ceil(N/n)`` times and the padding produces exact
    degeneracies. ``scheme`` selects where the window sits:

    ``"cyclic"``
        indices ``0 .. N-1``: the padding repeats the lowest levels.
    ``"centered"``
        the ``N - n`` padding indices are split evenly on both sides, as in
        ``numpy.pad(raw, (left, right), mode="wrap")``: the top levels are
        repeated below the spectrum and the bottom levels above it.

    The result is sorted ascending; ``n == N`` returns the input unchanged.
    """
    raw = check_spectrum(raw, min_length=1, name="raw")
    N = check_positive_int(N, "N")
    n = raw.size
    if n > N:
        raise ContractError(f"cannot extend {n} levels down to base size {N}")
    if scheme == "cyclic":
        idx = np.arange(N)
    elif scheme == "centered":
        left = (N - n) // 2
        idx = np.arange(-left, N - left)
    else:
        raise ConfigurationError(
            f"unknown extension scheme {scheme!r}; expected one of {EXTENSION_SCHEMES}"
        )
    return np.sort(raw[idx % n])


def _tukey_mask(values, fence_k):
    q1, q3 = np.percentile(values, [25.0, 75.0], method="linear")
    iqr = q3 - q1
    return (values >= q1 - fence_k * iqr) & (values <= q3 + fence_k * iqr)


def truncate_outliers(values, fence_k=DEFAULT_FENCE_K):
    """Drop values outside the Tukey fences ``[Q1 - k*IQR, Q3 + k*IQR]``.

    Quartiles use linear interpolation between order statistics
    (``numpy.percentile(method="linear")``). The fences are re-applied to the
    survivors until nothing more is removed, which makes the operation
    idempotent. ``fence_k=None`` or ``inf`` disables truncation.
    """
    values = check_spectrum(values, min_length=4, name="values")
    if fence_k is None or math.isinf(fence_k):
        return values.copy()
    if fence_k < 0:
        raise ConfigurationError(f"fence_k must be non-negative, got {fence_k}")
    while values.size >= 4:
        keep = _tukey_mask(values, fence_k)
        if keep.all():
            break
        values = values[keep]
    return values.copy()


def cumulative_staircase(values):
    """Return the counting function as rows ``(level, count)``.

    Degenerate levels share an abscissa, producing a vertical jump.
    """
    values = check_spectrum(values, name="values")
    return np.column_stack([values, np.arange(1, values.size + 1, dtype=float)])


@dataclass
class UnfoldedSpectrum:
    values: np.ndarray
    degree_used: int
    mean_spacing: float
    kept_fraction: float = 1.0
    polynomial: Polynomial = field(default=None, repr=False)


def fit_staircase(values, degree):
    """Least-squares polynomial of ``degree`` through the staircase points."""
    degree = check_positive_int(degree, "degree")
    values = check_spectrum(values, min_length=degree + 2, name="values")
    if values[-1] == values[0]:
        raise NumericalError(
            f"cannot fit degree {degree}: spectrum has zero width", degree=degree
        )
    counts = np.arange(1, values.size + 1, dtype=float)
    poly, (_, rank, _, _) = Polynomial.fit(values, counts, degree, full=True)
    if rank < degree + 1:
        raise NumericalError(
            f"rank-deficient staircase fit at degree {degree} (rank {rank})",
            degree=degree,
        )
    return poly


def apply_unfolding(values, poly, degree, kept_fraction=1.0):
    unfolded = np.sort(poly(np.asarray(values, dtype=float)))
    if unfolded.size > 1:
        mean_spacing = float((unfolded[-1] - unfolded[0]) / (unfolded.size - 1))
    else:
        mean_spacing = float("nan")
    return UnfoldedSpectrum(
        values=unfolded,
        degree_used=int(degree),
        mean_spacing=mean_spacing,
        kept_fraction=kept_fraction,
        polynomial=poly,
    )


def unfold(values, degree, kept_fraction=1.0):
    """Map levels through a fitted polynomial of the counting function."""
    poly = fit_staircase(values, degree)
    return apply_unfolding(values, poly, degree, kept_fraction)


def select_unfolding_degree(values, candidates=DEFAULT_DEGREES, kept_fraction=1.0):
    """Unfold with each candidate degree and keep the one whose mean spacing
    is closest to one.

    Ties (within ``TIE_TOLERANCE``) go to the smallest degree; candidates that
    cannot be fitted are skipped.

    Returns
    -------
    degree : int
    unfolded : UnfoldedSpectrum
    """
    candidates = sorted(set(int(d) for d in candidates))
    if not candidates:
        raise ConfigurationError("at least one candidate degree is required")
    best = None
    failures = []
    for degree in candidates:
        try:
            result = unfold(values, degree, kept_fraction)
        except (NumericalError, ContractError) as exc:
            failures.append(f"{degree}: {exc}")
            continue
        score = abs(result.mean_spacing - 1.0)
        if best is None or score < best[0] - TIE_TOLERANCE:
            best = (score, result)
    if best is None:
        raise NumericalError(
            "no candidate degree could be fitted (" + "; ".join(failures) + ")"
        )
    return best[1].degree_used, best[1]


def normalize_scale(values, sigma, n):
    """Rescale levels of an order-``n`` member so the semicircle edge sits at 2.

    Off-diagonal entries have variance ``sigma**2 / 2``, so the bulk edge is
    at ``2 * sigma * sqrt(n / 2)``; levels are divided by ``sigma * sqrt(n / 2)``.
    """
    sigma = check_positive_float(sigma, "sigma")
    n = check_positive_int(n, "n")
    return np.asarray(values, dtype=float) / (sigma * math.sqrt(n / 2.0))
