"""Age/sex partition evaluation with the Harris-Boyd criterion.

For two candidate subgroups the criterion compares

    z = |mean1 - mean2| / sqrt(sd1^2/n1 + sd2^2/n2)

against the threshold ``z* = 3 * sqrt(((n1 + n2)/2) / 120)``; the
subgroups warrant separate intervals when z exceeds z*. Both the
multiplier (3) and the normalizer (120) are configurable so alternative
published forms can be matched. An optional supplementary SD-ratio flag
(sd_larger/sd_smaller > limit) can be enabled; it is off by default and
never changes ``partition_required``.

``scan_partitions`` evaluates adjacent cell pairs over a list of
uniform widths (and one named non-uniform scheme: 1-year cells up to
age 15, then 20-year cells); ``compare_sexes`` runs F vs M within each
age cell. The engine reports the evidence only; choosing the final
partition is the analyst's call.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import combinations
from typing import Any, Sequence

from .model import Cohort, Segment, SummaryStats
from .stats import summarize

DEFAULT_WIDTHS = (1, 2, 3, 5, 8, 9, 10, 15, 20, 30, 40, 50)


@dataclass(frozen=True)
class HarrisBoydConfig:
    multiplier: float = 3.0
    normalizer: float = 120.0
    sd_ratio_limit: float | None = None


@dataclass(frozen=True)
class PartitionDecision:
    """One pairwise comparison: partition_required iff z > z_star."""

    scheme: str
    sex_filter: str
    left_label: str
    right_label: str
    n1: int
    mean1: float
    sd1: float
    n2: int
    mean2: float
    sd2: float
    z: float
    z_star: float
    partition_required: bool
    sd_ratio: float | None = None
    sd_ratio_flag: bool | None = None

    @property
    def pair(self) -> tuple[str, str]:
        return (self.left_label, self.right_label)

    def to_dict(self) -> dict[str, Any]:
        return {"scheme": self.scheme, "sex_filter": self.sex_filter,
                "left_label": self.left_label, "right_label": self.right_label,
                "n1": self.n1, "mean1": self.mean1, "sd1": self.sd1,
                "n2": self.n2, "mean2": self.mean2, "sd2": self.sd2,
                "z": self.z, "z_star": self.z_star,
                "partition_required": self.partition_required,
                "sd_ratio": self.sd_ratio, "sd_ratio_flag": self.sd_ratio_flag}


def harris_boyd_z(stats1: SummaryStats, stats2: SummaryStats,
                  label1: str = "left", label2: str = "right",
                  sex_filter: str = "both", scheme: str = "",
                  config: HarrisBoydConfig = HarrisBoydConfig()) -> PartitionDecision:
    """Harris-Boyd comparison of two segment summaries."""
    if stats1.n < 2 or stats2.n < 2:
        raise ValueError("harris_boyd_z requires n >= 2 on both sides")
    if not (math.isfinite(stats1.sd) and math.isfinite(stats2.sd)):
        raise ValueError("harris_boyd_z requires finite SDs")
    denom = math.sqrt(stats1.sd ** 2 / stats1.n + stats2.sd ** 2 / stats2.n)
    if denom == 0:
        raise ValueError("harris_boyd_z is undefined when both SDs are zero")
    z = abs(stats1.mean - stats2.mean) / denom
    z_star = config.multiplier * math.sqrt(((stats1.n + stats2.n) / 2.0)
                                           / config.normalizer)
    sd_ratio = None
    sd_ratio_flag = None
    if min(stats1.sd, stats2.sd) > 0:
        sd_ratio = max(stats1.sd, stats2.sd) / min(stats1.sd, stats2.sd)
        if config.sd_ratio_limit is not None:
            sd_ratio_flag = sd_ratio > config.sd_ratio_limit
    return PartitionDecision(scheme=scheme, sex_filter=sex_filter,
                             left_label=label1, right_label=label2,
                             n1=stats1.n, mean1=stats1.mean, sd1=stats1.sd,
                             n2=stats2.n, mean2=stats2.mean, sd2=stats2.sd,
                             z=z, z_star=z_star, partition_required=z > z_star,
                             sd_ratio=sd_ratio, sd_ratio_flag=sd_ratio_flag)


def width_cuts(width: int, max_age: int) -> list[int]:
    """Uniform cut points [0, width, 2*width, ...] covering ``max_age``."""
    if width < 1:
        raise ValueError(f"width must be a positive integer, got {width}")
    n_cells = max(1, math.ceil((max_age + 1) / width))
    return [i * width for i in range(n_cells + 1)]


def nonuniform_cuts(max_age: int) -> list[int]:
    """The named scheme: 1-year cells to age 15, then 20-year cells."""
    cuts = list(range(0, 16))
    while cuts[-1] <= max_age:
        cuts.append(cuts[-1] + 20)
    return cuts


def build_segments(cohort: Cohort, cuts: Sequence[int],
                   by_sex: bool = False) -> list[Segment]:
    """Partition a cohort into half-open age cells, optionally per sex.

    Pooled cells (sex_filter "both") retain observations of unknown
    sex; per-sex cells keep only exact matches. Cells are ordered by
    age, then F before M.
    """
    cuts = [int(c) for c in cuts]
    if len(cuts) < 2 or any(b <= a for a, b in zip(cuts, cuts[1:])):
        raise ValueError(f"cuts must be strictly increasing with >= 2 entries, got {cuts}")
    sexes = ("F", "M") if by_sex else ("both",)
    segments = []
    for lo, hi in zip(cuts, cuts[1:]):
        for sex in sexes:
            vals = tuple(o.value for o in cohort.observations
                         if lo <= o.age < hi and (sex == "both" or o.sex == sex))
            segments.append(Segment(lo=lo, hi=hi, sex_filter=sex, values=vals))
    return segments


def _segment_stats(segments: Sequence[Segment], scheme: str
                   ) -> list[tuple[Segment, SummaryStats]]:
    usable = []
    for seg in segments:
        if seg.n < 2:
            warnings.warn(f"{scheme}: skipping segment {seg.label}/{seg.sex_filter} "
                          f"with n={seg.n} < 2", UserWarning, stacklevel=3)
            continue
        usable.append((seg, summarize(seg.values)))
    return usable


def _scan_one_scheme(cohort: Cohort, cuts: Sequence[int], scheme: str,
                     sex_filters: Sequence[str], pairs: str,
                     config: HarrisBoydConfig) -> list[PartitionDecision]:
    decisions = []
    for sex in sex_filters:
        segs = [s for s in build_segments(cohort, cuts, by_sex=sex != "both")
                if s.sex_filter == sex]
        usable = _segment_stats(segs, scheme)
        if pairs == "adjacent":
            pairing = zip(usable, usable[1:])
        elif pairs == "all":
            pairing = combinations(usable, 2)
        else:
            raise ValueError(f"pairs must be 'adjacent' or 'all', got {pairs!r}")
        for (seg1, st1), (seg2, st2) in pairing:
            decisions.append(harris_boyd_z(st1, st2, seg1.label, seg2.label,
                                           sex_filter=sex, scheme=scheme,
                                           config=config))
    return decisions


def scan_partitions(cohort: Cohort, widths: Sequence[int] = DEFAULT_WIDTHS,
                    per_sex: bool = False, nonuniform: bool = False,
                    pairs: str = "adjacent",
                    config: HarrisBoydConfig = HarrisBoydConfig()
                    ) -> list[PartitionDecision]:
    """Evaluate the Harris-Boyd criterion over candidate partitions.

    For every width (and the non-uniform scheme when requested) each
    pair of adjacent age cells is compared, pooled or separately per
    sex. Cells with n < 2 are skipped with a warning.
    """
    if not cohort.observations:
        raise ValueError("scan_partitions requires a non-empty cohort")
    max_age = max(o.age for o in cohort.observations)
    sex_filters = ("F", "M") if per_sex else ("both",)
    decisions = []
    for width in widths:
        decisions.extend(_scan_one_scheme(cohort, width_cuts(width, max_age),
                                          f"width={width}", sex_filters, pairs,
                                          config))
    if nonuniform:
        decisions.extend(_scan_one_scheme(cohort, nonuniform_cuts(max_age),
                                          "nonuniform", sex_filters, pairs, config))
    return decisions


def compare_sexes(cohort: Cohort, widths: Sequence[int] = (10,),
                  config: HarrisBoydConfig = HarrisBoydConfig()
                  ) -> list[PartitionDecision]:
    """Harris-Boyd comparison of F vs M within each age cell."""
    if not cohort.observations:
        raise ValueError("compare_sexes requires a non-empty cohort")
    max_age = max(o.age for o in cohort.observations)
    decisions = []
    for width in widths:
        scheme = f"sexes@width={width}"
        segs = build_segments(cohort, width_cuts(width, max_age), by_sex=True)
        by_cell: dict[str, dict[str, Segment]] = {}
        for seg in segs:
            by_cell.setdefault(seg.label, {})[seg.sex_filter] = seg
        for label, cell in by_cell.items():
            f_seg, m_seg = cell.get("F"), cell.get("M")
            if f_seg is None or m_seg is None or f_seg.n < 2 or m_seg.n < 2:
                warnings.warn(f"{scheme}: skipping cell {label} with n < 2 in a sex",
                              UserWarning, stacklevel=2)
                continue
            decisions.append(harris_boyd_z(summarize(f_seg.values),
                                           summarize(m_seg.values),
                                           f"{label}/F", f"{label}/M",
                                           sex_filter="F vs M", scheme=scheme,
                                           config=config))
    return decisions
