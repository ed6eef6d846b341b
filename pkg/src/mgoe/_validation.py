"""Input validation helpers shared by the functional API and the estimators."""

import math
import numbers

import numpy as np

from .exceptions import ConfigurationError, ContractError


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ConfigurationError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigurationError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_positive_float(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ConfigurationError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not (value > 0 and math.isfinite(value)):
        raise ConfigurationError(f"{name} must be positive and finite, got {value}")
    return value


def check_mixture(mu):
    if isinstance(mu, bool) or not isinstance(mu, numbers.Real):
        raise ConfigurationError(f"mu must be a real number, got {mu!r}")
    mu = float(mu)
    if not 0.0 < mu <= 1.0:
        raise ConfigurationError(f"mu must lie in (0, 1], got {mu}")
    return mu


def check_level(level):
    level = float(level)
    if not 0.0 < level < 1.0:
        raise ConfigurationError(f"confidence level must lie in (0, 1), got {level}")
    return level


def check_spectrum(values, *, min_length=0, name="spectrum", sort=False):
    """Return ``values`` as a 1-D float array, validating length and order.

    Unsorted input raises unless ``sort`` is set, in which case it is sorted.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ContractError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_length:
        raise ContractError(
            f"{name} needs at least {min_length} values, got {arr.size}"
        )
    if not np.all(np.isfinite(arr)):
        raise ContractError(f"{name} contains non-finite values")
    if arr.size > 1 and np.any(np.diff(arr) < 0):
        if not sort:
            raise ContractError(f"{name} must be sorted ascending")
        arr = np.sort(arr)
    return arr


def check_spectra(X, *, min_length=0, sort=False):
    """Normalize a collection of member spectra to a list of 1-D float arrays.

    Accepts a 2-D array (one member per row) or any sequence of 1-D
    sequences, so ragged pre-extension spectra are allowed.
    """
    if isinstance(X, np.ndarray):
        if X.ndim == 1:
            X = [X]
        elif X.ndim != 2:
            raise ContractError(f"spectra must be 1-D or 2-D, got shape {X.shape}")
    out = [
        check_spectrum(row, min_length=min_length, name=f"spectrum[{i}]", sort=sort)
        for i, row in enumerate(X)
    ]
    if not out:
        raise ContractError("at least one member spectrum is required")
    return out


def check_bin_edges(edges):
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise ContractError("bin_edges needs at least two values")
    if np.any(np.diff(edges) <= 0):
        raise ContractError("bin_edges must be strictly increasing")
    return edges
