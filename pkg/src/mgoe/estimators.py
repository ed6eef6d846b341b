"""scikit-learn compatible wrappers around the processing and statistics steps.

Transformers take ``X`` as a collection of member spectra: a 2-D array with
one member per row, or a list of 1-D arrays when members differ in length.
They compose with :class:`sklearn.pipeline.Pipeline`::

    from sklearn.pipeline import make_pipeline

    raw = MixedGOESampler(N=500, M=100, mu=0.7, seed=1).sample_spectra()
    nnsd = make_pipeline(
        PeriodicExtender(base_size=500),
        OutlierTruncator(),
        SpectralUnfolder(),
        NearestNeighborSpacings(),
    ).fit_transform(raw)
    HistogramCI(range=(0, 4), bins=40).fit(nnsd).density_
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_spectra
from .exceptions import ContractError
from .experiment import member_spectra
from .processing import (
    DEFAULT_DEGREES,
    DEFAULT_EXTENSION,
    DEFAULT_FENCE_K,
    apply_unfolding,
    normalize_scale,
    periodic_extend,
    select_unfolding_degree,
    truncate_outliers,
)
from .sampling import EnsembleConfig, sample_mgoe
from .statistics import (
    DEFAULT_LEVEL,
    DEFAULT_RESAMPLES,
    bootstrap_indices,
    gap_ratio_result,
    histogram_with_ci,
    nn_spacings,
    uniform_edges,
)


class MixedGOESampler(BaseEstimator):
    """Draws mGOE(M, N, mu) members and their spectra."""

    def __init__(self, N=500, M=100, mu=1.0, sigma=1.0, seed=0, n_jobs=1):
        self.N = N
        self.M = M
        self.mu = mu
        self.sigma = sigma
        self.seed = seed
        self.n_jobs = n_jobs

    def _config(self):
        return EnsembleConfig(N=self.N, M=self.M, mu=self.mu, sigma=self.sigma, seed=self.seed)

    def sample(self):
        return sample_mgoe(self._config(), n_jobs=self.n_jobs)

    def sample_spectra(self):
        """Raw sorted eigenvalues per member (lengths follow the drawn sizes)."""
        return member_spectra(self._config(), n_jobs=self.n_jobs)[1]


class _StatelessTransformer(TransformerMixin, BaseEstimator):
    def fit(self, X, y=None):
        check_spectra(X)
        self.n_members_ = len(X)
        return self

    def transform(self, X):
        return [self._transform_one(x) for x in check_spectra(X)]


class ScaleNormalizer(_StatelessTransformer):
    """Rescales each raw member spectrum onto the semicircle support [-2, 2].

    Apply before :class:`PeriodicExtender`: the member order is read from the
    spectrum length.
    """

    def __init__(self, sigma=1.0):
        self.sigma = sigma

    def _transform_one(self, x):
        return normalize_scale(x, self.sigma, x.size)


class PeriodicExtender(_StatelessTransformer):
    """Periodically extends member spectra to ``base_size`` levels."""

    def __init__(self, base_size=500, scheme=DEFAULT_EXTENSION):
        self.base_size = base_size
        self.scheme = scheme

    def _transform_one(self, x):
        return periodic_extend(x, self.base_size, self.scheme)

    def transform(self, X):
        # every member has base_size levels after extension
        return np.vstack(super().transform(X))


class OutlierTruncator(TransformerMixin, BaseEstimator):
    """Tukey-fence truncation per member; records ``kept_fraction_``."""

    def __init__(self, fence_k=DEFAULT_FENCE_K):
        self.fence_k = fence_k

    def fit(self, X, y=None):
        X = check_spectra(X, min_length=4)
        self.kept_fraction_ = np.array(
            [truncate_outliers(x, self.fence_k).size / x.size for x in X]
        )
        return self

    def transform(self, X):
        return [truncate_outliers(x, self.fence_k) for x in check_spectra(X, min_length=4)]


class SpectralUnfolder(TransformerMixin, BaseEstimator):
    """Polynomial unfolding with per-member self-consistent degree selection.

    ``fit`` chooses, for each member, the candidate degree whose unfolded
    mean spacing is closest to one; ``transform`` maps member ``i`` of ``X``
    through the polynomial fitted to member ``i``.

    Attributes
    ----------
    degrees_ : ndarray of int
    mean_spacings_ : ndarray
    polynomials_ : list of numpy.polynomial.Polynomial
    """

    def __init__(self, degrees=DEFAULT_DEGREES):
        self.degrees = degrees

    def fit(self, X, y=None):
        X = check_spectra(X)
        fitted = [select_unfolding_degree(x, self.degrees)[1] for x in X]
        self.degrees_ = np.array([u.degree_used for u in fitted])
        self.mean_spacings_ = np.array([u.mean_spacing for u in fitted])
        self.polynomials_ = [u.polynomial for u in fitted]
        return self

    def transform(self, X):
        check_is_fitted(self, "polynomials_")
        X = check_spectra(X)
        if len(X) != len(self.polynomials_):
            raise ContractError(
                f"fitted on {len(self.polynomials_)} members, got {len(X)}"
            )
        return [
            apply_unfolding(x, p, d).values
            for x, p, d in zip(X, self.polynomials_, self.degrees_)
        ]

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X).transform(X)


class NearestNeighborSpacings(_StatelessTransformer):
    def _transform_one(self, x):
        return nn_spacings(x)


class HistogramCI(BaseEstimator):
    """Member-averaged density histogram with percentile bootstrap bands.

    ``range=None`` spans the 0.5th to 99.5th percentile of the pooled values.
    """

    def __init__(self, bins=50, range=None, n_resamples=DEFAULT_RESAMPLES,
                 level=DEFAULT_LEVEL, pooled=False, random_state=0):
        self.bins = bins
        self.range = range
        self.n_resamples = n_resamples
        self.level = level
        self.pooled = pooled
        self.random_state = random_state

    def fit(self, X, y=None):
        X = [np.asarray(x, dtype=float).ravel() for x in X]
        if self.range is None:
            low, high = np.percentile(np.concatenate(X), [0.5, 99.5])
        else:
            low, high = self.range
        hist = histogram_with_ci(
            X,
            uniform_edges(low, high, self.bins),
            self.n_resamples,
            self.level,
            rng=self.random_state,
            pooled=self.pooled,
        )
        self.result_ = hist
        self.bin_edges_ = hist.bin_edges
        self.density_ = hist.density
        self.ci_low_ = hist.ci_low
        self.ci_high_ = hist.ci_high
        return self


class GapRatioEstimator(BaseEstimator):
    """Mean adjacent gap ratio of an ensemble with a member bootstrap CI."""

    def __init__(self, zero_convention="keep", n_resamples=DEFAULT_RESAMPLES,
                 level=DEFAULT_LEVEL, random_state=0):
        self.zero_convention = zero_convention
        self.n_resamples = n_resamples
        self.level = level
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_spectra(X, min_length=3)
        indices = bootstrap_indices(len(X), self.n_resamples, self.random_state)
        res = gap_ratio_result(X, self.zero_convention, level=self.level, indices=indices)
        self.result_ = res
        self.per_member_r_ = res.per_member_r
        self.mean_r_ = res.mean_r
        self.ci_ = res.ci
        self.n_pairs_ = res.n_pairs_used
        return self

