"""Power-transform normalization (Box-Cox family).

The forward transform is ``T(y) = ((y + lambda2)^lambda1 - 1) / lambda1``
with the analytic log limit at lambda1 = 0. ``boxcox_fit`` maximizes the
profile log-likelihood

    l(lambda1) = -(n/2) ln(sigma^2(lambda1)) + (lambda1 - 1) sum ln(y + lambda2)

over a coarse grid followed by golden-section refinement; the shift
parameter lambda2 is only searched when the data contains values <= 0
(the two-parameter case) and stays 0 otherwise.
"""

from __future__ import annotations

import math
import warnings
from typing import Callable, Sequence

import numpy as np

from .model import IDENTITY_TRANSFORM, TransformSpec
from .stats import is_normal

# Fit search constants: lambda1 grid on [-3, 3], log-branch snap width,
# and the lambda2 candidate ladder (multiples of 1e-3 of the data range).
_LAMBDA1_LO, _LAMBDA1_HI = -3.0, 3.0
_GRID_STEP = 0.01
_COARSE_STEP = 0.05
_LOG_SNAP = 1e-4
_SHIFT_STEPS = 50


def _apply_core(y: np.ndarray, lambda1: float, lambda2: float) -> np.ndarray:
    shifted = y + lambda2
    if np.any(shifted <= 0):
        raise ValueError("boxcox_apply requires y + lambda2 > 0 for every value")
    logs = np.log(shifted)
    if lambda1 == 0.0:
        return logs
    # expm1 form is the same function, stable for small lambda1.
    return np.expm1(lambda1 * logs) / lambda1


def boxcox_apply(values, lambda1: float, lambda2: float = 0.0):
    """Elementwise T(y) = ((y + lambda2)^lambda1 - 1)/lambda1 (log at 0).

    Accepts a scalar or a sequence; returns a float or ndarray to match.
    """
    if np.isscalar(values):
        return float(_apply_core(np.asarray([values], dtype=float), lambda1, lambda2)[0])
    return _apply_core(np.asarray(values, dtype=float), lambda1, lambda2)


def _inverse_core(t: np.ndarray, lambda1: float, lambda2: float) -> np.ndarray:
    if lambda1 == 0.0:
        return np.exp(t) - lambda2
    arg = lambda1 * t
    if np.any(arg <= -1.0):
        raise ValueError("boxcox_inverse requires lambda1*t + 1 > 0")
    return np.exp(np.log1p(arg) / lambda1) - lambda2


def boxcox_inverse(t, lambda1: float, lambda2: float = 0.0):
    """Exact inverse of :func:`boxcox_apply`:
    y = (lambda1*t + 1)^(1/lambda1) - lambda2, or exp(t) - lambda2 at 0."""
    if np.isscalar(t):
        return float(_inverse_core(np.asarray([t], dtype=float), lambda1, lambda2)[0])
    return _inverse_core(np.asarray(t, dtype=float), lambda1, lambda2)


def _profile_loglik(log_shifted: np.ndarray, sum_logs: float, lambda1: float) -> float:
    n = log_shifted.size
    with np.errstate(over="ignore", invalid="ignore"):
        if abs(lambda1) < 1e-12:
            t = log_shifted
        else:
            t = np.expm1(lambda1 * log_shifted) / lambda1
        var = float(np.var(t))
    if not np.isfinite(var) or var <= 1e-300:
        return -math.inf
    return -0.5 * n * math.log(var) + (lambda1 - 1.0) * sum_logs


def _golden_max(f: Callable[[float], float], a: float, b: float,
                tol: float = 1e-6) -> float:
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return c if fc >= fd else d


def _best_lambda1(log_shifted: np.ndarray, step: float) -> tuple[float, float]:
    sum_logs = float(np.sum(log_shifted))
    grid = np.arange(_LAMBDA1_LO, _LAMBDA1_HI + step / 2, step)
    logliks = [_profile_loglik(log_shifted, sum_logs, lam) for lam in grid]
    k = int(np.argmax(logliks))
    best_lam, best_ll = float(grid[k]), logliks[k]
    if not math.isfinite(best_ll):
        raise ValueError("profile log-likelihood is non-finite everywhere")
    lo = max(_LAMBDA1_LO, best_lam - step)
    hi = min(_LAMBDA1_HI, best_lam + step)
    refined = _golden_max(lambda lam: _profile_loglik(log_shifted, sum_logs, lam), lo, hi)
    refined_ll = _profile_loglik(log_shifted, sum_logs, refined)
    if refined_ll > best_ll:
        best_lam, best_ll = refined, refined_ll
    if abs(best_lam) < _LOG_SNAP:
        best_lam = 0.0
        best_ll = _profile_loglik(log_shifted, sum_logs, 0.0)
    return best_lam, best_ll


def boxcox_fit(values: Sequence[float], allow_shift: bool = False) -> TransformSpec:
    """Fit transform parameters by profile maximum likelihood.

    lambda1 is found on a 0.01 grid over [-3, 3] plus golden-section
    refinement (|lambda1| < 1e-4 snaps to the exact log branch). When
    ``allow_shift`` and the data contains values <= 0, lambda2 is
    chosen jointly from a ladder of candidates just above -min(y);
    otherwise lambda2 = 0 and non-positive values are an error.
    """
    y = np.asarray(values, dtype=float)
    if y.size < 10:
        raise ValueError(f"boxcox_fit requires at least 10 values, got {y.size}")
    if np.isnan(y).any():
        raise ValueError("boxcox_fit received NaN values")
    ymin, ymax = float(y.min()), float(y.max())
    if ymax == ymin:
        raise ValueError("boxcox_fit is undefined for constant data")

    if ymin > 0:
        candidates = [0.0]
    elif not allow_shift:
        raise ValueError("data contains values <= 0; a shift (allow_shift) is required")
    else:
        eps = 1e-3 * (ymax - ymin)
        candidates = [-ymin + k * eps for k in range(1, _SHIFT_STEPS + 1)]

    if len(candidates) == 1:
        lambda2 = candidates[0]
    else:
        # Joint search: coarse lambda1 scan per shift candidate.
        def coarse_ll(l2: float) -> float:
            return _best_lambda1(np.log(y + l2), _COARSE_STEP)[1]

        lambda2 = max(candidates, key=coarse_ll)

    lambda1, loglik = _best_lambda1(np.log(y + lambda2), _GRID_STEP)
    return TransformSpec(applied=True, lambda1=lambda1, lambda2=lambda2, loglik=loglik)


def normalize_if_needed(values: Sequence[float], alpha: float = 0.05):
    """Gate a segment through the normality tests and transform if needed.

    Returns ``(TransformSpec, values-on-analysis-scale)``. Segments that
    pass every gate test come back unchanged with the identity spec.
    Post-transform normality is re-tested as a diagnostic only; a
    warning is emitted when the transformed values still fail, and the
    caller proceeds regardless.
    """
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("normalize_if_needed requires a non-empty segment")
    if is_normal(x, alpha):
        return IDENTITY_TRANSFORM, x
    spec = boxcox_fit(x, allow_shift=bool(x.min() <= 0))
    transformed = boxcox_apply(x, spec.lambda1, spec.lambda2)
    try:
        if not is_normal(transformed, alpha):
            warnings.warn("values still fail the normality gate after the "
                          "fitted transform; proceeding on the transformed scale",
                          UserWarning, stacklevel=2)
    except ValueError:
        pass
    return spec, transformed
