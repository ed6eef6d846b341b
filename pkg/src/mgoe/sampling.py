"""GOE sampling and construction of the mixed ensemble.

Random streams
--------------
Every stream is a ``numpy.random.Generator`` over PCG64 seeded from a
``numpy.random.SeedSequence`` with ``entropy=seed`` and a ``spawn_key`` of
``(mu_key, stream_kind, index)``:

* ``mu_key`` is ``round(mu * 1e9)``, so results for one mixture value do not
  depend on which other values are part of a sweep;
* ``stream_kind`` is 0 for the Binomial size draws, 1 for matrix members,
  2 for bootstrap resampling and 3 for synthetic baselines;
* ``index`` is the member index (0 for single streams).

SeedSequence hashes the key, so member ``i`` can be generated in any order,
on any worker, and gives bit-identical entries. Normal variates come from
``Generator.standard_normal`` (ziggurat) scaled by ``sigma``; both the bit
generator and the variate method are fixed for reproducibility.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._validation import (
    check_mixture,
    check_positive_float,
    check_positive_int,
)
from .exceptions import ConfigurationError

SIZES_STREAM = 0
MEMBER_STREAM = 1
BOOTSTRAP_STREAM = 2
BASELINE_STREAM = 3

_SEED_MAX = 2**64 - 1


def mu_key(mu):
    """Integer key identifying a mixture value in the seed hierarchy."""
    return int(round(float(mu) * 1e9))


def derive_rng(seed, mu, kind, index=0):
    """Return the generator for stream ``(mu, kind, index)`` under ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(mu_key(mu), kind, index))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class EnsembleConfig:
    """Parameters of one mixed ensemble draw, written mGOE(M, N, mu)."""

    N: int
    M: int = 100
    mu: float = 1.0
    sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        check_positive_int(self.N, "N", minimum=2)
        check_positive_int(self.M, "M")
        check_mixture(self.mu)
        check_positive_float(self.sigma, "sigma")
        if (
            isinstance(self.seed, bool)
            or not isinstance(self.seed, (int, np.integer))
            or not 0 <= self.seed <= _SEED_MAX
        ):
            raise ConfigurationError(
                f"seed must be an unsigned 64-bit integer, got {self.seed!r}"
            )


@dataclass
class Ensemble:
    config: EnsembleConfig
    sizes: tuple
    members: list = field(repr=False)

    def __post_init__(self):
        assert len(self.sizes) == len(self.members) == self.config.M
        assert all(m.shape == (n, n) for n, m in zip(self.sizes, self.members))


def draw_gaussian_matrix(n, sigma, rng):
    """Return an ``n x n`` array of independent Normal(0, sigma) draws."""
    n = check_positive_int(n, "n")
    sigma = check_positive_float(sigma, "sigma")
    return sigma * rng.standard_normal((n, n))


def symmetrize(G):
    """Return ``(G + G.T) / 2``.

    Floating-point addition is commutative, so the result is exactly
    symmetric.
    """
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ConfigurationError(f"expected a square matrix, got shape {G.shape}")
    return (G + G.T) / 2


def sample_goe(n, sigma, rng):
    """Draw one GOE member of order ``n``.

    Diagonal entries are Normal with variance sigma**2 and off-diagonal
    entries Normal with variance sigma**2 / 2.
    """
    return symmetrize(draw_gaussian_matrix(n, sigma, rng))


def draw_mixture_sizes(N, mu, M, rng):
    """Draw ``M`` member orders from Binomial(N, mu).

    A draw of zero has no spectrum and is redrawn from the same stream.
    ``mu == 1`` returns ``[N] * M`` without touching the stream.
    """
    N = check_positive_int(N, "N")
    M = check_positive_int(M, "M")
    mu = check_mixture(mu)
    if mu == 1.0:
        return [N] * M
    sizes = rng.binomial(N, mu, size=M)
    for i in np.flatnonzero(sizes == 0):
        while sizes[i] == 0:
            sizes[i] = rng.binomial(N, mu)
    return [int(s) for s in sizes]


def sample_member(config, index, size):
    """Generate member ``index`` of the ensemble independently of the others."""
    rng = derive_rng(config.seed, config.mu, MEMBER_STREAM, index)
    return sample_goe(size, config.sigma, rng)


def sample_sizes(config):
    rng = derive_rng(config.seed, config.mu, SIZES_STREAM)
    return draw_mixture_sizes(config.N, config.mu, config.M, rng)


def sample_mgoe(config, n_jobs=1):
    """Sample the mixed ensemble described by ``config``.

    Members are generated concurrently when ``n_jobs > 1``; the result does
    not depend on ``n_jobs``.
    """
    sizes = sample_sizes(config)
    indices = range(config.M)
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            members = list(pool.map(lambda i: sample_member(config, i, sizes[i]), indices))
    else:
        members = [sample_member(config, i, sizes[i]) for i in indices]
    return Ensemble(config=config, sizes=tuple(sizes), members=members)
