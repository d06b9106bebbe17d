import contextlib
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from refintervals.estimate import (
    biweight_location,
    biweight_weights,
    nonparametric_interval,
    parametric_interval,
    robust_interval,
)

sample_lists = st.lists(st.floats(-1e4, 1e4, allow_nan=False, allow_infinity=False),
                        min_size=2, max_size=80)


# --------------------------------------------------------------- parametric

def test_parametric_engineered_moments():
    lo, hi = parametric_interval([1.5, 2.0, 2.5])  # mean 2, sd 0.5
    assert lo == pytest.approx(1.02, rel=1e-12)
    assert hi == pytest.approx(2.98, rel=1e-12)


def test_parametric_constant_degenerate():
    assert parametric_interval([5, 5, 5]) == (5.0, 5.0)


def test_parametric_gaussian_large_sample():
    x = np.random.default_rng(0).normal(0, 1, 100_000)
    lo, hi = parametric_interval(x)
    assert lo == pytest.approx(-1.96, abs=0.03)
    assert hi == pytest.approx(1.96, abs=0.03)


def test_parametric_precondition():
    with pytest.raises(ValueError):
        parametric_interval([1.0])


@given(sample_lists)
def test_parametric_symmetric_about_mean(values):
    lo, hi = parametric_interval(values)
    mean = float(np.mean(np.asarray(values)))
    assert (hi - mean) == pytest.approx(mean - lo, rel=1e-9, abs=1e-9)


# ------------------------------------------------------------ nonparametric

def test_nonparametric_minimum_n_is_min_max():
    xs = list(range(1, 40))  # n = 39: ranks 1 and 39 exactly
    with pytest.warns(UserWarning):
        lo, hi = nonparametric_interval(xs)
    assert (lo, hi) == (1.0, 39.0)


def test_nonparametric_integer_ranks_exact():
    rng = np.random.default_rng(1)
    x = rng.lognormal(0, 1, 199)  # ranks 5 and 195 exactly
    lo, hi = nonparametric_interval(x)
    xs = np.sort(x)
    assert lo == xs[4] and hi == xs[194]


def brute_force_nonparametric(values):
    xs = sorted(values)
    n = len(xs)

    def at(rank):
        i = int(math.floor(rank))
        frac = rank - i
        if frac == 0.0 or i >= n:
            return xs[min(i, n) - 1]
        return xs[i - 1] + frac * (xs[i] - xs[i - 1])

    return at((n + 1) / 40.0), at(39.0 * (n + 1) / 40.0)


def test_nonparametric_interpolated_matches_oracle():
    rng = np.random.default_rng(2)
    for n in (100, 123, 150, 500):
        x = rng.normal(10, 3, n)
        guard = pytest.warns(UserWarning) if n < 120 else contextlib.nullcontext()
        with guard:
            ours = nonparametric_interval(x)
        assert ours == brute_force_nonparametric(x)


def test_nonparametric_precondition_and_warning():
    with pytest.raises(ValueError):
        nonparametric_interval(list(range(38)))
    with pytest.warns(UserWarning, match="119"):
        nonparametric_interval(np.arange(119.0))


def test_nonparametric_monotone_map_equivariance_exact():
    # Sample sizes with integer endpoint ranks: order statistics commute
    # exactly with any strictly increasing map.
    rng = np.random.default_rng(3)
    for n in (39, 79, 199):
        x = rng.lognormal(0, 0.8, n)
        knots_x = np.linspace(x.min() - 1, x.max() + 1, 7)
        knots_y = np.cumsum(rng.uniform(0.1, 3.0, 7))
        mapped = np.interp(x, knots_x, knots_y)
        guard = pytest.warns(UserWarning) if n < 120 else contextlib.nullcontext()
        with guard:
            lo, hi = nonparametric_interval(x)
            mlo, mhi = nonparametric_interval(mapped)
        assert mlo == np.interp(lo, knots_x, knots_y)
        assert mhi == np.interp(hi, knots_x, knots_y)


# ------------------------------------------------------------------ biweight

def test_weight_curve_shape():
    assert biweight_weights(0.0) == 1.0
    assert biweight_weights(1.0) == 0.0
    assert biweight_weights(-1.0) == 0.0
    assert biweight_weights(2.5) == 0.0
    assert biweight_weights(1 - 1e-9) == pytest.approx(0.0, abs=1e-8)
    u = np.linspace(0, 1, 1000)
    w = biweight_weights(u)
    assert np.all(np.diff(w) <= 0)  # non-increasing on [0, 1]


def test_biweight_symmetric_fixed_point():
    diag = biweight_location([1, 2, 3])
    assert diag.t_bi == 2.0
    assert diag.iterations == 1
    assert not diag.degenerate


def test_biweight_degenerate_mad_zero():
    diag = biweight_location([5, 5, 5, 5])
    assert diag.t_bi == 5.0
    assert diag.iterations == 0
    assert diag.degenerate


def test_biweight_downweights_outlier():
    diag = biweight_location([1, 2, 3, 4, 5, 100])
    assert diag.t_bi < np.mean([1, 2, 3, 4, 5, 100])  # far below the mean
    assert 2.5 < diag.t_bi < 3.5
    assert diag.final_delta < 1e-5


def test_biweight_precondition():
    with pytest.raises(ValueError):
        biweight_location([1.0])
    with pytest.raises(ValueError):
        biweight_location([1.0, 2.0], max_iter=0)


@given(st.lists(st.floats(-100, 100, allow_nan=False), min_size=2, max_size=60),
       st.floats(0.1, 10), st.floats(-50, 50))
@settings(max_examples=60)
def test_biweight_location_scale_equivariant(values, a, b):
    base = biweight_location(values)
    mapped = biweight_location([a * v + b for v in values])
    assert mapped.degenerate == base.degenerate
    assert mapped.t_bi == pytest.approx(a * base.t_bi + b, rel=1e-6, abs=1e-6)


@given(sample_lists)
def test_biweight_within_data_range(values):
    diag = biweight_location(values)
    assert min(values) <= diag.t_bi <= max(values)


# -------------------------------------------------------------------- robust

def test_robust_interval_wider_than_parametric_tiny_n():
    (lo, hi), diag = robust_interval([1, 2, 3])
    plo, phi = parametric_interval([1, 2, 3])
    assert hi - lo > 0
    assert hi - lo >= phi - plo  # t-quantile at df=2 dwarfs 1.96
    assert diag.s_bi is not None and diag.s_t is not None


def test_robust_constant_degenerate():
    (lo, hi), diag = robust_interval([5, 5, 5, 5])
    assert (lo, hi) == (5.0, 5.0)
    assert diag.degenerate


def test_robust_gaussian_close_to_parametric():
    x = np.random.default_rng(0).normal(2.0, 0.5, 5000)
    (rlo, rhi), _ = robust_interval(x)
    plo, phi = parametric_interval(x)
    width = phi - plo
    assert abs(rlo - plo) / width < 0.02
    assert abs(rhi - phi) / width < 0.02


def test_robust_symmetric_about_center():
    x = np.random.default_rng(1).normal(0, 1, 500)
    (lo, hi), diag = robust_interval(x)
    assert (hi + lo) / 2 == pytest.approx(diag.t_bi, abs=1e-9)


def test_robust_precondition():
    with pytest.raises(ValueError):
        robust_interval([1.0, 2.0])
