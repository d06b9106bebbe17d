"""The two outlier elimination procedures.

Both operate on whatever scale they are handed (the pipeline hands them
the transformed scale) and return an :class:`EliminationResult` whose
retained/eliminated blocks partition the input multiset. Decisions are
invariant under increasing affine maps: fence comparisons and gap/range
ratios are scale-free.

* Tukey: one-shot fences at Q1 - k*IQR and Q3 + k*IQR computed from the
  full input (default k = 1.5). Not iterated: re-fencing would eliminate
  more than the values beyond the original quartile fences.
* Block D/R: per tail, the most extreme value x is eliminated together
  with everything more extreme when D(x)/R exceeds the cutoff (default
  1/3), where D(x) is the gap to the nearest less extreme value and R
  is the range of the current data. By default the rule is re-applied
  with recomputed D and R until neither tail eliminates, testing the
  tail farther from the median first; ``iterate=False`` gives the
  single-application reading.

Ties at a fence or at a tested extreme are eliminated together.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .model import EliminationResult
from .stats import quantile


def _sorted_input(values: Sequence[float], min_n: int, what: str) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    if x.size < min_n:
        raise ValueError(f"{what} requires at least {min_n} values, got {x.size}")
    if np.isnan(x).any():
        raise ValueError(f"{what} received NaN values")
    return np.sort(x)


def _result(procedure: str, x: np.ndarray, k_lo: int, k_hi: int,
            diagnostics: dict) -> EliminationResult:
    n = x.size
    return EliminationResult(
        procedure=procedure,
        retained=tuple(float(v) for v in x[k_lo:n - k_hi]),
        eliminated_low=tuple(float(v) for v in x[:k_lo]),
        eliminated_high=tuple(float(v) for v in x[n - k_hi:]),
        diagnostics=diagnostics,
    )


def tukey_eliminate(values: Sequence[float],
                    fence_coefficient: float = 1.5) -> EliminationResult:
    """Eliminate all values beyond the quartile fences, in one shot.

    Fences are computed from the full input; values strictly outside
    [Q1 - k*IQR, Q3 + k*IQR] are eliminated.
    """
    x = _sorted_input(values, 4, "tukey_eliminate")
    q1 = quantile(x, 0.25)
    q3 = quantile(x, 0.75)
    iqr = q3 - q1
    fence_low = q1 - fence_coefficient * iqr
    fence_high = q3 + fence_coefficient * iqr
    k_lo = int(np.searchsorted(x, fence_low, side="left"))
    k_hi = x.size - int(np.searchsorted(x, fence_high, side="right"))
    diagnostics = {"fence_coefficient": float(fence_coefficient),
                   "q1": q1, "q3": q3, "iqr": iqr,
                   "fence_low": fence_low, "fence_high": fence_high}
    return _result("tukey", x, k_lo, k_hi, diagnostics)


def _tail_test(cur: np.ndarray, tail: str, cutoff: float, r: float):
    """Gap, tie count and trip decision for one tail's extreme value."""
    if tail == "high":
        top = cur[-1]
        j = int(np.searchsorted(cur, top, side="left"))
        d = float(top - cur[j - 1])
        ties = cur.size - j
    else:
        bottom = cur[0]
        j = int(np.searchsorted(cur, bottom, side="right"))
        d = float(cur[j] - bottom)
        ties = j
    ratio = d / r
    return d, ties, ratio, ratio > cutoff


def _tail_order(cur: np.ndarray) -> tuple[str, str]:
    med = float(np.median(cur))
    if cur[-1] - med >= med - cur[0]:
        return ("high", "low")
    return ("low", "high")


def block_dr_eliminate(values: Sequence[float], cutoff: float = 1.0 / 3.0,
                       iterate: bool = True) -> EliminationResult:
    """Block gap/range elimination, per tail, most extreme value first.

    Constant data (range 0) eliminates nothing and is flagged. In
    iterating mode the procedure stops once fewer than 3 values remain.
    """
    x = _sorted_input(values, 3, "block_dr_eliminate")
    n = x.size
    k_lo = k_hi = 0
    passes: list[dict] = []
    constant = False

    if iterate:
        while n - k_lo - k_hi >= 3:
            cur = x[k_lo:n - k_hi]
            r = float(cur[-1] - cur[0])
            if r == 0:
                constant = True
                break
            eliminated = False
            for tail in _tail_order(cur):
                d, ties, ratio, trip = _tail_test(cur, tail, cutoff, r)
                passes.append({"tail": tail, "d": d, "r": r, "ratio": ratio,
                               "eliminated": ties if trip else 0})
                if trip:
                    if tail == "high":
                        k_hi += ties
                    else:
                        k_lo += ties
                    eliminated = True
                    break
            if not eliminated:
                break
    else:
        r = float(x[-1] - x[0])
        if r == 0:
            constant = True
        else:
            for tail in _tail_order(x):
                d, ties, ratio, trip = _tail_test(x, tail, cutoff, r)
                passes.append({"tail": tail, "d": d, "r": r, "ratio": ratio,
                               "eliminated": ties if trip else 0})
                if trip:
                    if tail == "high":
                        k_hi = ties
                    else:
                        k_lo = ties

    diagnostics = {"cutoff": float(cutoff), "iterate": iterate,
                   "constant": constant, "passes": passes}
    return _result("block_dr", x, k_lo, k_hi, diagnostics)
