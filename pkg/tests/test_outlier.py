import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from refintervals.outlier import block_dr_eliminate, tukey_eliminate

data_lists = st.lists(st.floats(-1e5, 1e5, allow_nan=False, allow_infinity=False),
                      min_size=4, max_size=60)


# -------------------------------------------------------------------- Tukey

def test_tukey_hand_example():
    res = tukey_eliminate([1, 2, 3, 4, 100])
    d = res.diagnostics
    assert d["q1"] == 2 and d["q3"] == 4
    assert d["fence_low"] == -1 and d["fence_high"] == 7
    assert res.eliminated_high == (100.0,)
    assert res.eliminated_low == ()
    assert res.retained == (1.0, 2.0, 3.0, 4.0)


def test_tukey_nothing_to_eliminate():
    res = tukey_eliminate(range(1, 11))
    assert res.n_eliminated == 0


def test_tukey_low_tail():
    res = tukey_eliminate([-100, 1, 2, 3, 4])
    assert res.eliminated_low == (-100.0,)
    assert res.eliminated_high == ()


def test_tukey_precondition():
    with pytest.raises(ValueError):
        tukey_eliminate([1, 2, 3])


@given(data_lists)
def test_tukey_fence_strictness(values):
    # Eliminations are strictly outside the fences; ties at a fence stay.
    res = tukey_eliminate(values)
    lo, hi = res.diagnostics["fence_low"], res.diagnostics["fence_high"]
    assert all(v < lo for v in res.eliminated_low)
    assert all(v > hi for v in res.eliminated_high)
    assert all(lo <= v <= hi for v in res.retained)


def test_tukey_ties_eliminated_together():
    res = tukey_eliminate([1, 2, 3, 4, 100, 100])
    assert res.eliminated_high == (100.0, 100.0)


def test_tukey_never_eliminates_median():
    rng = np.random.default_rng(0)
    for _ in range(50):
        x = rng.lognormal(0, 1, rng.integers(4, 60))
        res = tukey_eliminate(x)
        med = np.median(x)
        assert (not res.retained) or min(res.retained) <= med <= max(res.retained)


def test_tukey_gaussian_fraction_small():
    # Near-Gaussian data loses only a fraction of a percent to the fences.
    for seed in range(5):
        x = np.random.default_rng(seed).normal(0, 1, 2000)
        res = tukey_eliminate(x)
        assert res.n_eliminated / 2000 < 0.025


# ---------------------------------------------------------------- block D/R

def test_dr_hand_example_single_block():
    res = block_dr_eliminate([1, 2, 3, 4, 100])
    assert res.eliminated_high == (100.0,)
    passes = res.diagnostics["passes"]
    assert passes[0]["d"] == 96 and passes[0]["r"] == 99
    # After the elimination, both tails fail to trip: D = 1, R = 3.
    assert passes[-1]["d"] == 1 and passes[-1]["r"] == 3


def test_dr_nothing_to_eliminate():
    res = block_dr_eliminate(range(1, 11))
    assert res.n_eliminated == 0
    assert res.diagnostics["passes"][0]["ratio"] == pytest.approx(1 / 9)


def test_dr_iterates_with_recomputation():
    res = block_dr_eliminate([1, 2, 3, 4, 50, 100])
    assert res.eliminated_high == (50.0, 100.0)
    ratios = [p["ratio"] for p in res.diagnostics["passes"] if p["eliminated"]]
    assert ratios[0] == pytest.approx(50 / 99)
    assert ratios[1] == pytest.approx(46 / 49)


def test_dr_one_shot_mode():
    res = block_dr_eliminate([1, 2, 3, 4, 50, 100], iterate=False)
    assert res.eliminated_high == (100.0,)
    assert res.diagnostics["iterate"] is False


def test_dr_low_tail():
    res = block_dr_eliminate([-100, 1, 2, 3, 4])
    assert res.eliminated_low == (-100.0,)


def test_dr_ties_eliminated_together():
    res = block_dr_eliminate([1, 2, 3, 4, 100, 100])
    assert res.eliminated_high == (100.0, 100.0)


def test_dr_constant_data_flagged():
    res = block_dr_eliminate([5, 5, 5, 5])
    assert res.n_eliminated == 0
    assert res.diagnostics["constant"] is True


def test_dr_precondition():
    with pytest.raises(ValueError):
        block_dr_eliminate([1, 2])


def test_dr_stops_above_two_values():
    # A wildly-separated trio must not eliminate itself to nothing.
    res = block_dr_eliminate([0.0, 1000.0, 2000.0])
    assert len(res.retained) >= 2


# ---------------------------------------------------------- shared properties

@given(data_lists)
def test_partition_property(values):
    for res in (tukey_eliminate(values), block_dr_eliminate(values)):
        combined = sorted(res.retained + res.eliminated_low + res.eliminated_high)
        assert combined == sorted(values)
        if res.eliminated_low and res.retained:
            assert max(res.eliminated_low) < min(res.retained)
        if res.eliminated_high and res.retained:
            assert max(res.retained) < min(res.eliminated_high)


@given(data_lists, st.floats(0.01, 100), st.floats(-1e4, 1e4))
def test_affine_decision_invariance(values, a, b):
    mapped = [a * v + b for v in values]
    for func in (tukey_eliminate, block_dr_eliminate):
        res, mapped_res = func(values), func(mapped)
        assert len(res.eliminated_low) == len(mapped_res.eliminated_low)
        assert len(res.eliminated_high) == len(mapped_res.eliminated_high)


@given(data_lists)
def test_dr_terminates_within_n_passes(values):
    res = block_dr_eliminate(values)
    eliminating = sum(1 for p in res.diagnostics["passes"] if p["eliminated"])
    assert eliminating <= len(values)


def test_dr_gaussian_inert():
    for seed in range(5):
        x = np.random.default_rng(seed).normal(0, 1, 2000)
        assert block_dr_eliminate(x).n_eliminated == 0
