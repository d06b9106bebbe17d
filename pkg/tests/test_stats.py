import math

import numpy as np
import pytest
import scipy.stats
from hypothesis import given
from hypothesis import strategies as st

from refintervals.stats import (
    anderson_darling_normal,
    is_normal,
    ks_lilliefors_normal,
    normality_report,
    quantile,
    skewness_test,
    student_t_upper_quantile,
    summarize,
)
from refintervals.synth import generate, iga_profile

value_lists = st.lists(st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False),
                       min_size=1, max_size=50)


# ---------------------------------------------------------------- quantile

def brute_force_quantile(values, p):
    """Independent interpolation oracle: walk the sorted list by rank."""
    xs = sorted(values)
    h = (len(xs) - 1) * p
    i = int(math.floor(h))
    if i >= len(xs) - 1:
        return xs[-1]
    return xs[i] + (h - i) * (xs[i + 1] - xs[i])


def test_quantile_hand_example():
    # rank h = 3 * 0.25 + 1 = 1.75 -> 10 + 0.75 * 10
    assert quantile([10, 20, 30, 40], 0.25) == 17.5


def test_quantile_extremes_and_singleton():
    assert quantile([10, 20, 30, 40], 0) == 10
    assert quantile([10, 20, 30, 40], 1) == 40
    assert quantile([7], 0.5) == 7


def test_quantile_errors():
    with pytest.raises(ValueError):
        quantile([], 0.5)
    with pytest.raises(ValueError):
        quantile([1.0, float("nan")], 0.5)
    with pytest.raises(ValueError):
        quantile([1.0], 1.5)


@given(value_lists, st.floats(0, 1))
def test_quantile_matches_brute_force(values, p):
    assert quantile(values, p) == pytest.approx(brute_force_quantile(values, p),
                                                rel=1e-12, abs=1e-12)


@given(value_lists, st.floats(0, 1), st.floats(0, 1))
def test_quantile_monotone_in_p(values, p1, p2):
    lo, hi = sorted([p1, p2])
    assert quantile(values, lo) <= quantile(values, hi)


@given(value_lists, st.floats(0, 1),
       st.floats(0.01, 100), st.floats(-1e3, 1e3))
def test_quantile_affine_equivariant(values, p, a, b):
    mapped = [a * v + b for v in values]
    assert quantile(mapped, p) == pytest.approx(a * quantile(values, p) + b,
                                                rel=1e-9, abs=1e-6)


# ---------------------------------------------------------------- summarize

def test_summarize_basic():
    s = summarize([1, 2, 3])
    assert s.mean == 2 and s.sd == 1 and s.median == 2 and s.n == 3


def test_summarize_constant():
    s = summarize([5, 5, 5])
    assert s.sd == 0 and s.mad == 0 and s.skewness == 0


def test_summarize_single_value():
    s = summarize([4.2])
    assert s.sd == 0 and s.min == s.max == 4.2


def test_summarize_errors():
    with pytest.raises(ValueError):
        summarize([])


def test_summarize_matches_compensated_two_pass():
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = rng.lognormal(0.5, 0.8, rng.integers(2, 400)).tolist()
        s = summarize(x)
        n = len(x)
        mean = math.fsum(x) / n
        sd = math.sqrt(math.fsum((v - mean) ** 2 for v in x) / (n - 1))
        assert s.mean == pytest.approx(mean, rel=1e-12)
        assert s.sd == pytest.approx(sd, rel=1e-12)


def test_summarize_skewness_sign():
    rng = np.random.default_rng(0)
    assert summarize(rng.lognormal(0, 0.8, 2000)).skewness > 1
    assert abs(summarize([-2, -1, 0, 1, 2] * 20).skewness) < 1e-12


def test_synth_decade0_calibration():
    # Generator calibration to the published-style young-decade moments
    # (0.86 mean, 0.59 sd); loose by design, the anchor is approximate.
    cohort = generate(iga_profile(), seed=0)
    vals = [o.value for o in cohort.observations if o.age < 10 and o.sex == "F"]
    s = summarize(vals)
    assert 0.65 < s.mean < 1.10
    assert 0.35 < s.sd < 0.90


# ---------------------------------------------------------- normality tests

def test_ad_statistic_matches_scipy():
    rng = np.random.default_rng(5)
    x = rng.normal(3, 2, 200)
    ours = anderson_darling_normal(x)
    ref = scipy.stats.anderson(x, dist="norm")
    n = len(x)
    adjusted_ref = ref.statistic * (1 + 0.75 / n + 2.25 / n ** 2)
    assert ours.statistic == pytest.approx(adjusted_ref, rel=1e-10)
    # 0.752 is the standard 5% point for the estimated-parameter case.
    assert ours.critical_value == 0.752


def test_ad_gaussian_fixed_seed_accepts():
    rng = np.random.default_rng(0)
    assert not anderson_darling_normal(rng.normal(0, 1, 1000)).reject_normality


def test_ad_gaussian_null_rejection_rate():
    rejections = sum(
        anderson_darling_normal(np.random.default_rng(1000 + s).normal(0, 1, 1000))
        .reject_normality for s in range(200))
    assert rejections <= 20  # nominal 5% level, generous bound


def test_ad_uniform_rejects():
    for seed in range(20):
        x = np.random.default_rng(seed).uniform(0, 1, 500)
        assert anderson_darling_normal(x).reject_normality


def test_ad_preconditions():
    with pytest.raises(ValueError):
        anderson_darling_normal([1, 2, 3, 4, 5])
    with pytest.raises(ValueError):
        anderson_darling_normal([1.0] * 50)


def brute_force_lilliefors_stat(x):
    xs = np.sort(np.asarray(x, float))
    z = scipy.stats.norm.cdf((xs - xs.mean()) / xs.std(ddof=1))
    n = len(xs)
    gaps = [max((i + 1) / n - z[i], z[i] - i / n) for i in range(n)]
    return max(gaps)


def test_ks_statistic_matches_brute_force():
    x = np.random.default_rng(6).normal(0, 1, 137)
    ours = ks_lilliefors_normal(x)
    assert ours.statistic == pytest.approx(brute_force_lilliefors_stat(x), rel=1e-12)
    assert ours.critical_value == pytest.approx(0.886 / math.sqrt(137))


def test_ks_gaussian_fixed_seed_accepts():
    x = np.random.default_rng(0).normal(0, 1, 1000)
    assert not ks_lilliefors_normal(x).reject_normality


def test_ks_exponential_rejects():
    for seed in range(20):
        x = np.random.default_rng(seed).exponential(1.0, 500)
        assert ks_lilliefors_normal(x).reject_normality


def test_ks_preconditions():
    with pytest.raises(ValueError):
        ks_lilliefors_normal([1, 2, 3, 4, 5])


def test_skewness_exactly_symmetric_data():
    res = skewness_test([-2, -1, 0, 1, 2] * 20)
    assert res.statistic == 0 and not res.reject_normality
    assert res.p_value == pytest.approx(1.0)


def test_skewness_matches_scipy():
    x = np.random.default_rng(7).lognormal(0, 0.4, 300)
    ours = skewness_test(x)
    z_ref, p_ref = scipy.stats.skewtest(x)
    assert ours.statistic == pytest.approx(float(z_ref), rel=1e-10)
    assert ours.p_value == pytest.approx(float(p_ref), rel=1e-10)


def test_skewness_lognormal_rejects():
    for seed in range(20):
        x = np.random.default_rng(seed).lognormal(0, 0.8, 1000)
        assert skewness_test(x).reject_normality


def test_skewness_preconditions():
    with pytest.raises(ValueError):
        skewness_test(list(range(10)))
    with pytest.raises(ValueError):
        skewness_test([2.0] * 30)


def test_is_normal_gaussian_true():
    assert is_normal(np.random.default_rng(0).normal(5, 2, 2000))


def test_is_normal_lognormal_false():
    for seed in range(20):
        assert not is_normal(np.random.default_rng(seed).lognormal(0, 0.8, 2000))


def test_is_normal_any_fail_rule():
    # Seed chosen so only the skewness test trips: the any-fail rule
    # must still report non-normality.
    x = np.exp(np.random.default_rng(1).normal(0.0, 0.035, 3000))
    report = normality_report(x)
    assert not report["anderson_darling"].reject_normality
    assert not report["ks_lilliefors"].reject_normality
    assert report["skewness"].reject_normality
    assert not is_normal(x)


def test_is_normal_unknown_test_and_alpha():
    x = np.random.default_rng(0).normal(0, 1, 100)
    with pytest.raises(ValueError):
        is_normal(x, tests=("shapiro",))
    with pytest.raises(ValueError):
        is_normal(x, alpha=0.07)


def test_gate_alpha_variants():
    x = np.random.default_rng(0).normal(0, 1, 500)
    for alpha in (0.10, 0.05, 0.01):
        normality_report(x, alpha=alpha)


# ----------------------------------------------------------- Student t tail

def test_t_quantile_table_values():
    assert student_t_upper_quantile(0.025, 1) == pytest.approx(12.7062047, rel=1e-6)
    assert student_t_upper_quantile(0.025, 10) == pytest.approx(2.2281389, rel=1e-6)
    assert student_t_upper_quantile(0.025, 10 ** 6) == pytest.approx(1.960, abs=1e-3)


def test_t_quantile_monotone_in_df_and_p():
    dfs = [1, 2, 5, 10, 50, 200, 10 ** 4]
    vals = [student_t_upper_quantile(0.025, df) for df in dfs]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    ps = [0.005, 0.01, 0.025, 0.1, 0.25, 0.45]
    vals = [student_t_upper_quantile(p, 7) for p in ps]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_t_quantile_errors():
    with pytest.raises(ValueError):
        student_t_upper_quantile(0.025, 0)
    with pytest.raises(ValueError):
        student_t_upper_quantile(0.6, 10)
    with pytest.raises(ValueError):
        student_t_upper_quantile(0.0, 10)
