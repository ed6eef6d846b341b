import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from oracles import lstsq_unfold

from mgoe.eigen import eigenvalues_symmetric
from mgoe.exceptions import ConfigurationError, ContractError, NumericalError
from mgoe.processing import (
    cumulative_staircase,
    normalize_scale,
    periodic_extend,
    select_unfolding_degree,
    truncate_outliers,
    unfold,
)
from mgoe.sampling import sample_goe

sorted_floats = st.lists(
    st.floats(-1e3, 1e3, allow_nan=False), min_size=1, max_size=60
).map(sorted)


@pytest.fixture(scope="module")
def goe_spectrum():
    return eigenvalues_symmetric(sample_goe(1000, 1.0, np.random.default_rng(8)))


# --- periodic extension ---------------------------------------------------


def test_cyclic_tiling_examples():
    a, b, c = 1.0, 2.0, 3.0
    assert periodic_extend([a, b, c], 7, "cyclic").tolist() == [a, a, a, b, b, c, c]
    assert periodic_extend([-1.0, 2.0], 5, "cyclic").tolist() == [-1, -1, -1, 2, 2]


def test_centered_wraps_both_edges():
    # indices -2..4 mod 3 read 2, 3 | 1, 2, 3 | 1, 2
    assert periodic_extend([1.0, 2.0, 3.0], 7, "centered").tolist() == [1, 1, 2, 2, 2, 3, 3]
    x = np.arange(10.0)
    ext = periodic_extend(x, 14, "centered")
    counts = {v: int((ext == v).sum()) for v in x}
    assert counts == {0: 2, 1: 2, 2: 1, 3: 1, 4: 1, 5: 1, 6: 1, 7: 1, 8: 2, 9: 2}


@pytest.mark.parametrize("scheme", ["centered", "cyclic"])
def test_identity_at_full_size(scheme):
    x = np.array([-2.0, 0.1, 0.5, 3.0])
    assert np.array_equal(periodic_extend(x, 4, scheme), x)


def test_extension_errors():
    with pytest.raises(ContractError):
        periodic_extend([1.0, 2.0, 3.0], 2)
    with pytest.raises(ConfigurationError):
        periodic_extend([1.0], 3, "mirror")


@given(sorted_floats, st.integers(1, 200), st.sampled_from(["centered", "cyclic"]))
def test_extension_multiplicities(raw, extra, scheme):
    raw = np.array(raw)
    N = raw.size + extra
    ext = periodic_extend(raw, N, scheme)
    assert ext.size == N
    assert np.all(np.diff(ext) >= 0)
    # each raw slot is used floor(N/n) or ceil(N/n) times
    n = raw.size
    idx_counts = np.bincount(
        (np.arange(N) if scheme == "cyclic" else np.arange(-((N - n) // 2), N - (N - n) // 2)) % n,
        minlength=n,
    )
    assert set(idx_counts) <= {N // n, -(-N // n)}
    expected = np.sort(np.repeat(raw, idx_counts))
    assert np.array_equal(ext, expected)


# --- truncation -----------------------------------------------------------


def test_truncation_examples():
    assert truncate_outliers([1.0, 2.0, 3.0, 4.0], 1.5).tolist() == [1, 2, 3, 4]
    # Q1 = 2, Q3 = 4 under linear interpolation: upper fence 4 + 1.5 * 2 = 7
    assert np.percentile([1, 2, 3, 4, 100], [25, 75]).tolist() == [2.0, 4.0]
    assert truncate_outliers([1.0, 2.0, 3.0, 4.0, 100.0], 1.5).tolist() == [1, 2, 3, 4]
    x = [1.0, 2.0, 3.0, 4.0, 1e9]
    assert truncate_outliers(x, math.inf).tolist() == x
    assert truncate_outliers(x, None).tolist() == x


def test_truncation_errors():
    with pytest.raises(ContractError):
        truncate_outliers([1.0, 2.0, 3.0])
    with pytest.raises(ConfigurationError):
        truncate_outliers([1.0, 2.0, 3.0, 4.0], -1)


@settings(max_examples=200)
@given(
    st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=4, max_size=80).map(sorted),
    st.floats(0, 3),
)
def test_truncation_idempotent(values, k):
    once = truncate_outliers(values, k)
    assume(once.size >= 4)
    assert np.array_equal(truncate_outliers(once, k), once)
    assert set(once.tolist()) <= set(values)


def test_truncation_keeps_goe_bulk(goe_spectrum):
    assert truncate_outliers(goe_spectrum).size == goe_spectrum.size


# --- staircase and unfolding ----------------------------------------------


def test_staircase():
    assert cumulative_staircase([0.5]).tolist() == [[0.5, 1]]
    assert cumulative_staircase([1.0, 1.0, 2.0]).tolist() == [[1, 1], [1, 2], [2, 3]]
    assert cumulative_staircase(np.arange(17.0))[-1, 1] == 17


def test_unfold_linear_staircase():
    res = unfold(np.arange(10.0), 1)
    np.testing.assert_allclose(np.diff(res.values), 1.0, atol=1e-10)
    assert abs(res.mean_spacing - 1) <= 1e-10
    assert res.degree_used == 1


def test_unfold_interpolating_regime_is_sorted():
    x = np.array([0.0, 0.1, 0.15, 2.0, 2.1, 5.0, 5.05, 9.0])
    res = unfold(x, x.size - 2)
    assert np.all(np.diff(res.values) >= 0)


def test_unfold_preconditions():
    with pytest.raises(ContractError):
        unfold([0.0, 1.0, 2.0], 2)
    with pytest.raises(NumericalError) as err:
        unfold([1.0, 1.0, 1.0, 1.0, 1.0], 2)
    assert err.value.degree == 2


def test_unfold_rank_deficient_names_degree():
    # only two distinct abscissae cannot support a cubic
    x = np.array([0.0] * 5 + [1.0] * 5)
    with pytest.raises(NumericalError, match="degree 3"):
        unfold(x, 3)


def test_unfold_goe_mean_spacing(goe_spectrum):
    res = unfold(goe_spectrum, 5)
    assert 0.9 <= res.mean_spacing <= 1.1
    np.testing.assert_allclose(res.values, lstsq_unfold(goe_spectrum, 5), rtol=1e-8, atol=1e-6)


@given(
    st.floats(-100, 100),
    st.floats(0.01, 100),
    st.integers(5, 200),
    st.integers(1, 3),
)
def test_unfold_uniform_spectrum(offset, step, n, degree):
    x = offset + step * np.arange(n)
    assume(n >= degree + 2)
    res = unfold(x, degree)
    assert abs(res.mean_spacing - 1) <= 1e-9


def test_select_degree_examples():
    degree, res = select_unfolding_degree(np.arange(20.0), [5, 3, 1])
    assert degree == 1 and res.degree_used == 1
    degree, _ = select_unfolding_degree(np.arange(20.0), [7])
    assert degree == 7


def test_select_degree_is_exhaustive_minimum(goe_spectrum):
    candidates = [3, 5, 7, 9, 11]
    degree, res = select_unfolding_degree(goe_spectrum, candidates)
    assert degree in candidates
    scores = {d: abs(unfold(goe_spectrum, d).mean_spacing - 1) for d in candidates}
    assert all(abs(res.mean_spacing - 1) <= s + 1e-12 for s in scores.values())


def test_select_degree_skips_unfittable_and_reports_total_failure():
    x = np.array([0.0] * 5 + [1.0] * 5)
    degree, _ = select_unfolding_degree(x, [1, 3])
    assert degree == 1
    with pytest.raises(NumericalError):
        select_unfolding_degree(x, [3, 5])
    with pytest.raises(ConfigurationError):
        select_unfolding_degree(x, [])


# --- scaling --------------------------------------------------------------


def test_normalize_scale():
    assert normalize_scale([0.0], 1.0, 10).tolist() == [0.0]
    sigma, n = 1.7, 400
    edge = 2 * sigma * math.sqrt(n / 2)
    np.testing.assert_allclose(normalize_scale([edge], sigma, n), [2.0], rtol=1e-15)


def test_normalize_goe_member_onto_support(goe_spectrum):
    scaled = normalize_scale(goe_spectrum, 1.0, 1000)
    assert np.mean(np.abs(scaled) > 2.1) <= 0.005
