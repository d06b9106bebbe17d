"""Deterministic statistical kernel.

Descriptive statistics, the shared order-statistic quantile, the three
normality tests used as the transformation gate, and the Student-t
upper tail quantile needed by the robust interval.

One quantile convention is used everywhere, including the Tukey
quartiles: linear interpolation between order statistics at rank
``h = (n - 1) * p + 1`` on the sorted sequence. The convention is
echoed into report metadata so results are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np
from scipy.stats import norm as _norm
from scipy.stats import t as _student_t

from .model import SummaryStats

QUANTILE_CONVENTION = "linear interpolation at rank h=(n-1)p+1 on the sorted values"

# 5% (and neighbouring) critical values for the composite tests, i.e.
# with mean and SD estimated from the sample:
#   Anderson-Darling uses the small-sample adjusted statistic
#   A*^2 = A^2 (1 + 0.75/n + 2.25/n^2); Kolmogorov-Smirnov uses the
#   Lilliefors large-sample approximation coef/sqrt(n).
_AD_CRITICAL = {0.10: 0.631, 0.05: 0.752, 0.01: 1.035}
_LILLIEFORS_COEF = {0.10: 0.805, 0.05: 0.886, 0.01: 1.031}
_SKEW_Z_CRITICAL = {0.10: 1.645, 0.05: 1.96, 0.01: 2.576}


@dataclass(frozen=True)
class TestResult:
    """Outcome of one normality test at a configured level.

    ``p_value`` is populated only where a standard approximation exists
    (the skewness test); the distribution-shape tests compare their
    statistic against ``critical_value`` directly.
    """

    statistic: float
    p_value: float | None
    critical_value: float | None
    reject_normality: bool

    def to_dict(self) -> dict[str, Any]:
        return {"statistic": self.statistic, "p_value": self.p_value,
                "critical_value": self.critical_value,
                "reject_normality": self.reject_normality}


def _as_clean_array(values: Iterable[float], min_n: int, what: str) -> np.ndarray:
    x = np.asarray(list(values) if not isinstance(values, (np.ndarray, list, tuple)) else values,
                   dtype=float)
    if x.ndim != 1:
        x = x.ravel()
    if x.size < min_n:
        raise ValueError(f"{what} requires at least {min_n} values, got {x.size}")
    if np.isnan(x).any():
        raise ValueError(f"{what} received NaN values")
    return x


def quantile(values: Sequence[float], p: float) -> float:
    """Order-statistic quantile at rank h = (n-1)p + 1, interpolated.

    >>> quantile([10, 20, 30, 40], 0.25)
    17.5
    """
    x = _as_clean_array(values, 1, "quantile")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    x = np.sort(x)
    h = (x.size - 1) * p  # zero-based fractional index of rank h
    i = int(math.floor(h))
    if i >= x.size - 1:
        return float(x[-1])
    frac = h - i
    return float(x[i] + frac * (x[i + 1] - x[i]))


def summarize(values: Sequence[float]) -> SummaryStats:
    """Descriptive statistics for one segment.

    Sample SD uses the n-1 denominator (0 for n = 1); MAD is the raw
    median absolute deviation, unscaled: the 0.6745 consistency factor
    is applied at the point of use in the robust estimator. Skewness is
    the moment coefficient g1 (0 for constant data).
    """
    x = _as_clean_array(values, 1, "summarize")
    n = x.size
    mean = float(np.mean(x))
    sd = float(np.std(x, ddof=1)) if n > 1 else 0.0
    med = quantile(x, 0.5)
    mad = float(np.median(np.abs(x - med)))
    m2 = float(np.mean((x - mean) ** 2))
    m3 = float(np.mean((x - mean) ** 3))
    skew = m3 / m2 ** 1.5 if m2 > 0 else 0.0
    return SummaryStats(n=n, mean=mean, sd=sd, median=med, mad=mad,
                        q1=quantile(x, 0.25), q3=quantile(x, 0.75),
                        skewness=skew, min=float(x.min()), max=float(x.max()))


def _standardized_sorted(x: np.ndarray, what: str) -> np.ndarray:
    mean = float(np.mean(x))
    sd = float(np.std(x, ddof=1))
    if sd <= 0:
        raise ValueError(f"{what} is undefined for constant data")
    return (np.sort(x) - mean) / sd


def _lookup_alpha(table: dict[float, float], alpha: float) -> float:
    for a, v in table.items():
        if math.isclose(alpha, a):
            return v
    raise ValueError(f"alpha must be one of {sorted(table)}, got {alpha}")


def anderson_darling_normal(values: Sequence[float], alpha: float = 0.05) -> TestResult:
    """Anderson-Darling test of normality with estimated mean and SD.

    Returns the small-sample adjusted statistic
    A*^2 = A^2 (1 + 0.75/n + 2.25/n^2); normality is rejected at the
    5% level when A*^2 exceeds 0.752.
    """
    x = _as_clean_array(values, 8, "anderson_darling_normal")
    n = x.size
    z = _norm.cdf(_standardized_sorted(x, "anderson_darling_normal"))
    # Clip to keep the logs finite for extreme standardized values.
    z = np.clip(z, 1e-300, 1 - 1e-16)
    i = np.arange(1, n + 1)
    a2 = -n - np.sum((2 * i - 1) * (np.log(z) + np.log1p(-z[::-1]))) / n
    a2_star = float(a2 * (1 + 0.75 / n + 2.25 / n ** 2))
    crit = _lookup_alpha(_AD_CRITICAL, alpha)
    return TestResult(statistic=a2_star, p_value=None, critical_value=crit,
                      reject_normality=a2_star > crit)


def ks_lilliefors_normal(values: Sequence[float], alpha: float = 0.05) -> TestResult:
    """Kolmogorov-Smirnov test against a Normal with estimated parameters.

    The critical value is the Lilliefors large-sample approximation
    coef/sqrt(n) (coef = 0.886 at the 5% level, stated for n > 30 and
    applied as-is below).
    """
    x = _as_clean_array(values, 8, "ks_lilliefors_normal")
    n = x.size
    z = _norm.cdf(_standardized_sorted(x, "ks_lilliefors_normal"))
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - z)
    d_minus = np.max(z - (i - 1) / n)
    d = float(max(d_plus, d_minus))
    crit = _lookup_alpha(_LILLIEFORS_COEF, alpha) / math.sqrt(n)
    return TestResult(statistic=d, p_value=None, critical_value=crit,
                      reject_normality=d > crit)


def skewness_test(values: Sequence[float], alpha: float = 0.05) -> TestResult:
    """D'Agostino's skewness z test, two-sided.

    Rejects at the 5% level when |z| > 1.96. Exactly symmetric data has
    g1 = 0 and therefore z = 0.
    """
    x = _as_clean_array(values, 20, "skewness_test")
    n = x.size
    mean = float(np.mean(x))
    m2 = float(np.mean((x - mean) ** 2))
    if m2 <= 0:
        raise ValueError("skewness_test is undefined for constant data")
    g1 = float(np.mean((x - mean) ** 3)) / m2 ** 1.5
    y = g1 * math.sqrt((n + 1) * (n + 3) / (6.0 * (n - 2)))
    beta2 = (3.0 * (n ** 2 + 27 * n - 70) * (n + 1) * (n + 3)
             / ((n - 2.0) * (n + 5) * (n + 7) * (n + 9)))
    w2 = -1.0 + math.sqrt(2.0 * (beta2 - 1.0))
    delta = 1.0 / math.sqrt(0.5 * math.log(w2))
    a = math.sqrt(2.0 / (w2 - 1.0))
    z = delta * math.asinh(y / a)
    p = math.erfc(abs(z) / math.sqrt(2.0))
    crit = _lookup_alpha(_SKEW_Z_CRITICAL, alpha)
    return TestResult(statistic=z, p_value=p, critical_value=crit,
                      reject_normality=abs(z) > crit)


_GATE_TESTS = {
    "anderson_darling": anderson_darling_normal,
    "ks_lilliefors": ks_lilliefors_normal,
    "skewness": skewness_test,
}


def normality_report(values: Sequence[float], alpha: float = 0.05,
                     tests: Sequence[str] = tuple(_GATE_TESTS)) -> dict[str, TestResult]:
    """Run the configured battery of normality tests and return all results."""
    unknown = set(tests) - set(_GATE_TESTS)
    if unknown:
        raise ValueError(f"unknown normality tests: {sorted(unknown)}")
    return {name: _GATE_TESTS[name](values, alpha) for name in tests}


def is_normal(values: Sequence[float], alpha: float = 0.05,
              tests: Sequence[str] = tuple(_GATE_TESTS)) -> bool:
    """False iff ANY of the gate tests rejects normality at ``alpha``."""
    report = normality_report(values, alpha, tests)
    return not any(r.reject_normality for r in report.values())


def student_t_upper_quantile(tail_p: float, df: int) -> float:
    """Value t with P(T > t) = tail_p for a Student t with ``df`` degrees
    of freedom, accurate to 1e-6 relative."""
    if not 0.0 < tail_p < 0.5:
        raise ValueError(f"tail_p must lie in (0, 0.5), got {tail_p}")
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    return float(_student_t.ppf(1.0 - tail_p, df))
