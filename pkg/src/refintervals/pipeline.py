"""Orchestration of the full per-segment computation and the report matrix.

Execution order per segment, fixed:

1. normality gate on the raw values (policy ``auto``; ``force`` skips
   the gate, ``off`` skips transformation entirely);
2. if gated, fit the power transform ONCE per segment on the
   pre-elimination values; the fit is shared by the eliminations and
   the transform-scale estimators so that cells within a segment differ
   only in the elimination itself (``refit_after_elimination`` opts
   into re-fitting per cell for sensitivity studies);
3. run the elimination procedure on the analysis scale;
4. parametric and robust methods compute on the analysis scale and
   back-transform their endpoints; the non-parametric method computes
   on the retained original-scale values (equivalent by monotone
   invariance, asserted in debug mode);
5. clamp the lower endpoint at 0, flagged.

Per-cell failures (e.g. a method's minimum n) become error markers in
the record, never exceptions: a production report surfaces every
computable cell. Exit status of the CLI distinguishes full success from
partial tables.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .estimate import (
    LOCATION_TUNING,
    SCALE_TUNING,
    nonparametric_interval,
    parametric_interval,
    robust_interval,
)
from .model import (
    IDENTITY_TRANSFORM,
    METHODS,
    PROCEDURES,
    Cohort,
    EliminationResult,
    IntervalRecord,
    Segment,
    SummaryStats,
    TransformSpec,
)
from .outlier import block_dr_eliminate, tukey_eliminate
from .partition import build_segments, width_cuts
from .stats import QUANTILE_CONVENTION, is_normal, normality_report, summarize
from .synth import RNG_ALGORITHM
from .transform import boxcox_apply, boxcox_fit, boxcox_inverse

_TRANSFORM_POLICIES = ("auto", "force", "off")


@dataclass(frozen=True)
class RunConfig:
    """Knobs for one report run; defaults reproduce the standard setup."""

    width: int | None = 10
    cuts: tuple[int, ...] | None = None
    by_sex: bool = False
    eliminations: tuple[str, ...] = ("none", "tukey", "block_dr")
    methods: tuple[str, ...] = ("parametric", "nonparametric", "robust")
    alpha: float = 0.05
    transform: str = "auto"
    location_tuning: float = LOCATION_TUNING
    scale_tuning: float = SCALE_TUNING
    fence_coefficient: float = 1.5
    dr_cutoff: float = 1.0 / 3.0
    dr_iterate: bool = True
    refit_after_elimination: bool = False
    seed: int | None = None  # provenance echo for synth-generated cohorts

    def __post_init__(self) -> None:
        elim = tuple(p for p in PROCEDURES if p in set(self.eliminations))
        meth = tuple(m for m in METHODS if m in set(self.methods))
        if set(self.eliminations) - set(PROCEDURES):
            raise ValueError(f"unknown eliminations: "
                             f"{sorted(set(self.eliminations) - set(PROCEDURES))}")
        if set(self.methods) - set(METHODS):
            raise ValueError(f"unknown methods: "
                             f"{sorted(set(self.methods) - set(METHODS))}")
        if not elim or not meth:
            raise ValueError("eliminations and methods must both be non-empty")
        object.__setattr__(self, "eliminations", elim)
        object.__setattr__(self, "methods", meth)
        if self.transform not in _TRANSFORM_POLICIES:
            raise ValueError(f"transform policy must be one of {_TRANSFORM_POLICIES}")
        if self.cuts is None and (self.width is None or self.width < 1):
            raise ValueError("either a positive width or an explicit cut list is required")
        if self.cuts is not None:
            object.__setattr__(self, "cuts", tuple(int(c) for c in self.cuts))

    def to_dict(self) -> dict[str, Any]:
        return {"width": self.width,
                "cuts": None if self.cuts is None else list(self.cuts),
                "by_sex": self.by_sex,
                "eliminations": list(self.eliminations),
                "methods": list(self.methods),
                "alpha": self.alpha, "transform": self.transform,
                "location_tuning": self.location_tuning,
                "scale_tuning": self.scale_tuning,
                "fence_coefficient": self.fence_coefficient,
                "dr_cutoff": self.dr_cutoff, "dr_iterate": self.dr_iterate,
                "refit_after_elimination": self.refit_after_elimination,
                "seed": self.seed}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "RunConfig":
        d = dict(d)
        if d.get("cuts") is not None:
            d["cuts"] = tuple(d["cuts"])
        d["eliminations"] = tuple(d["eliminations"])
        d["methods"] = tuple(d["methods"])
        return cls(**d)


@dataclass(frozen=True)
class SegmentReport:
    """Everything the report carries for one segment."""

    label: str
    sex: str
    lo: int
    hi: int
    n: int
    summary: SummaryStats | None
    transform: TransformSpec
    gate: dict
    eliminations: dict
    records: tuple[IntervalRecord, ...]

    def to_dict(self) -> dict[str, Any]:
        return {"label": self.label, "sex": self.sex, "lo": self.lo,
                "hi": self.hi, "n": self.n,
                "summary": None if self.summary is None else self.summary.to_dict(),
                "transform": self.transform.to_dict(),
                "gate": self.gate, "eliminations": self.eliminations,
                "records": [r.to_dict() for r in self.records]}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "SegmentReport":
        return cls(label=str(d["label"]), sex=str(d["sex"]),
                   lo=int(d["lo"]), hi=int(d["hi"]), n=int(d["n"]),
                   summary=None if d["summary"] is None
                   else SummaryStats.from_dict(d["summary"]),
                   transform=TransformSpec.from_dict(d["transform"]),
                   gate=dict(d["gate"]),
                   eliminations=dict(d["eliminations"]),
                   records=tuple(IntervalRecord.from_dict(r) for r in d["records"]))


@dataclass(frozen=True)
class ReportTable:
    """The full report: metadata plus one SegmentReport per segment."""

    metadata: dict
    segments: tuple[SegmentReport, ...]

    @property
    def records(self) -> tuple[IntervalRecord, ...]:
        return tuple(r for seg in self.segments for r in seg.records)

    def to_dict(self) -> dict[str, Any]:
        return {"metadata": self.metadata,
                "segments": [s.to_dict() for s in self.segments]}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ReportTable":
        return cls(metadata=dict(d["metadata"]),
                   segments=tuple(SegmentReport.from_dict(s) for s in d["segments"]))


@dataclass
class _Prepared:
    """Per-segment state shared by every cell of the matrix row."""

    segment: Segment
    summary: SummaryStats | None
    transform: TransformSpec
    gate: dict
    original_sorted: np.ndarray
    analysis_sorted: np.ndarray


def _compact_gate(gate: Mapping[str, Any]) -> dict:
    """Per-record excerpt of the segment gate diagnostics."""
    out: dict[str, Any] = {}
    if "is_normal" in gate:
        out["is_normal"] = gate["is_normal"]
    if "tests" in gate:
        out["reject"] = {name: t["reject_normality"] for name, t in gate["tests"].items()}
        skew = gate["tests"].get("skewness")
        if skew is not None:
            out["skewness_p"] = skew["p_value"]
    if "error" in gate:
        out["error"] = gate["error"]
    return out


def prepare_segment(segment: Segment, config: RunConfig) -> _Prepared:
    """Summary, normality gate and (shared) transform fit for one segment."""
    x = np.sort(np.asarray(segment.values, dtype=float))
    gate: dict[str, Any] = {"policy": config.transform}
    spec = IDENTITY_TRANSFORM
    summary = summarize(x) if x.size else None

    if x.size == 0:
        gate["error"] = "empty_segment"
    elif config.transform != "off":
        gated = config.transform == "force"
        if config.transform == "auto":
            try:
                report = normality_report(x, config.alpha)
                gate["tests"] = {name: r.to_dict() for name, r in report.items()}
                gate["is_normal"] = not any(r.reject_normality for r in report.values())
                gated = not gate["is_normal"]
            except ValueError as exc:
                # Gate not applicable (tiny or constant segment): proceed
                # untransformed and say so.
                gate["error"] = str(exc)
                gated = False
        if gated:
            try:
                spec = boxcox_fit(x, allow_shift=bool(x.min() <= 0))
            except ValueError as exc:
                gate["fit_error"] = str(exc)
                spec = IDENTITY_TRANSFORM

    if spec.applied:
        analysis = boxcox_apply(x, spec.lambda1, spec.lambda2)
        try:
            gate["post_transform_normal"] = bool(is_normal(analysis, config.alpha))
        except ValueError:
            gate["post_transform_normal"] = None
    else:
        analysis = x
    return _Prepared(segment=segment, summary=summary, transform=spec,
                     gate=gate, original_sorted=x, analysis_sorted=analysis)


def _run_elimination(prepared: _Prepared, name: str, config: RunConfig
                     ) -> tuple[EliminationResult | None, str | None]:
    x = prepared.analysis_sorted
    try:
        if name == "none":
            return EliminationResult("none", tuple(float(v) for v in x), (), (), {}), None
        if name == "tukey":
            return tukey_eliminate(x, config.fence_coefficient), None
        if name == "block_dr":
            return block_dr_eliminate(x, config.dr_cutoff, config.dr_iterate), None
        raise ValueError(f"unknown elimination {name!r}")
    except ValueError as exc:
        return None, str(exc)


def _back_transform(lo_t: float, hi_t: float, spec: TransformSpec,
                    flags: list[str]) -> tuple[float | None, float | None, str | None]:
    """Map analysis-scale endpoints to the original scale, clamping at 0."""
    if spec.applied:
        try:
            lo = float(boxcox_inverse(lo_t, spec.lambda1, spec.lambda2))
        except ValueError:
            # Below the transform image: corresponds to y < 0.
            lo = 0.0
            flags.append("lower_beyond_transform_domain")
        try:
            hi = float(boxcox_inverse(hi_t, spec.lambda1, spec.lambda2))
        except ValueError:
            return None, None, "upper endpoint falls outside the transform domain"
    else:
        lo, hi = float(lo_t), float(hi_t)
    if hi < 0:
        hi = 0.0
        flags.append("clamped_upper")
    if lo < 0:
        lo = 0.0
        flags.append("clamped_lower")
    return lo, hi, None


def _estimate_cell(prepared: _Prepared, elim_name: str,
                   elim: EliminationResult | None, elim_error: str | None,
                   method: str, config: RunConfig) -> IntervalRecord:
    seg = prepared.segment
    n = seg.n

    def errored(message: str, n_eliminated: int = 0) -> IntervalRecord:
        return IntervalRecord(segment_label=seg.label, sex=seg.sex_filter,
                              n_input=n, elimination=elim_name,
                              n_eliminated=n_eliminated, method=method,
                              lower=None, upper=None,
                              transform=prepared.transform, flags=(),
                              error=message,
                              diagnostics={"normality": _compact_gate(prepared.gate)})

    if n == 0:
        return errored("empty_segment")
    if elim is None:
        return errored(f"elimination failed: {elim_error}")

    k_lo = len(elim.eliminated_low)
    k_hi = len(elim.eliminated_high)
    retained_analysis = prepared.analysis_sorted[k_lo:n - k_hi]
    retained_original = prepared.original_sorted[k_lo:n - k_hi]
    m = retained_analysis.size
    n_eliminated = k_lo + k_hi

    transform = prepared.transform
    flags: list[str] = []
    diagnostics: dict[str, Any] = {"n_used": int(m),
                                   "normality": _compact_gate(prepared.gate)}

    if config.refit_after_elimination and transform.applied and \
            method in ("parametric", "robust"):
        try:
            transform = boxcox_fit(retained_original,
                                   allow_shift=bool(retained_original.min() <= 0))
            retained_analysis = boxcox_apply(retained_original,
                                             transform.lambda1, transform.lambda2)
            diagnostics["refit_after_elimination"] = True
        except ValueError as exc:
            diagnostics["refit_error"] = str(exc)
            transform = prepared.transform

    if method == "parametric":
        if m < 2:
            return errored(f"parametric requires n >= 2 after elimination, got {m}",
                           n_eliminated)
        lo_t, hi_t = parametric_interval(retained_analysis)
        diagnostics["mean"] = float(np.mean(retained_analysis))
        diagnostics["sd"] = float(np.std(retained_analysis, ddof=1))
        if lo_t == hi_t:
            flags.append("degenerate_constant")
        lower, upper, err = _back_transform(lo_t, hi_t, transform, flags)
    elif method == "robust":
        if m < 3:
            return errored(f"robust requires n >= 3 after elimination, got {m}",
                           n_eliminated)
        (lo_t, hi_t), rdiag = robust_interval(
            retained_analysis, c=config.location_tuning,
            scale_tuning=config.scale_tuning)
        diagnostics["robust"] = rdiag.to_dict()
        if rdiag.degenerate:
            flags.append("degenerate_constant")
        lower, upper, err = _back_transform(lo_t, hi_t, transform, flags)
    elif method == "nonparametric":
        if m < 39:
            return errored(f"nonparametric requires n >= 39 after elimination, got {m}",
                           n_eliminated)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            lo, hi = nonparametric_interval(retained_original)
            if __debug__ and transform.applied:
                # Monotone invariance: the same interval must come out of
                # the back-transformed analysis-scale values.
                alt = nonparametric_interval(
                    boxcox_inverse(retained_analysis, transform.lambda1,
                                   transform.lambda2))
                assert math.isclose(alt[0], lo, rel_tol=1e-9, abs_tol=1e-12)
                assert math.isclose(alt[1], hi, rel_tol=1e-9, abs_tol=1e-12)
        if m < 120:
            flags.append("small_n_nonparametric")
        diagnostics["rank_low"] = (m + 1) / 40.0
        diagnostics["rank_high"] = 39.0 * (m + 1) / 40.0
        lower, upper, err = _back_transform(lo, hi, IDENTITY_TRANSFORM, flags)
    else:
        raise ValueError(f"unknown method {method!r}")

    if err is not None:
        return errored(err, n_eliminated)
    return IntervalRecord(segment_label=seg.label, sex=seg.sex_filter,
                          n_input=n, elimination=elim_name,
                          n_eliminated=n_eliminated, method=method,
                          lower=lower, upper=upper, transform=transform,
                          flags=tuple(flags), error=None,
                          diagnostics=diagnostics)


def run_cell(segment: Segment, elimination: str, method: str,
             config: RunConfig = RunConfig()) -> IntervalRecord:
    """Run the full fixed-order computation for a single matrix cell."""
    prepared = prepare_segment(segment, config)
    elim, elim_error = _run_elimination(prepared, elimination, config)
    return _estimate_cell(prepared, elimination, elim, elim_error, method, config)


def _segment_report(segment: Segment, config: RunConfig) -> SegmentReport:
    prepared = prepare_segment(segment, config)
    elim_summaries: dict[str, Any] = {}
    records: list[IntervalRecord] = []
    for elim_name in config.eliminations:
        elim, elim_error = _run_elimination(prepared, elim_name, config)
        if elim is None:
            elim_summaries[elim_name] = {"n_eliminated": 0, "error": elim_error}
        else:
            elim_summaries[elim_name] = {
                "n_eliminated": elim.n_eliminated,
                "n_low": len(elim.eliminated_low),
                "n_high": len(elim.eliminated_high),
                "diagnostics": elim.diagnostics,
            }
        for method in config.methods:
            records.append(_estimate_cell(prepared, elim_name, elim, elim_error,
                                          method, config))
    return SegmentReport(label=segment.label, sex=segment.sex_filter,
                         lo=segment.lo, hi=segment.hi, n=segment.n,
                         summary=prepared.summary, transform=prepared.transform,
                         gate=prepared.gate, eliminations=elim_summaries,
                         records=tuple(records))


def run_matrix(cohort: Cohort, config: RunConfig = RunConfig()) -> ReportTable:
    """Partition the cohort and run every (segment, elimination, method) cell.

    The output is deterministic: segments ordered by age then sex, then
    eliminations and methods in canonical order. Empty cells stay in
    the matrix with error markers.
    """
    from . import __version__

    if not cohort.observations:
        raise ValueError("run_matrix requires a non-empty cohort")
    if config.cuts is not None:
        cuts = list(config.cuts)
    else:
        cuts = width_cuts(config.width, max(o.age for o in cohort.observations))
    segments = build_segments(cohort, cuts, config.by_sex)
    seg_reports = tuple(_segment_report(seg, config) for seg in segments)
    assigned = sum(seg.n for seg in segments)
    metadata = {
        "engine": "refintervals",
        "version": __version__,
        "quantile_convention": QUANTILE_CONVENTION,
        "config": config.to_dict(),
        "cuts": [int(c) for c in cuts],
        "n_observations": len(cohort.observations),
        "n_excluded": len(cohort.exclusion_log),
        "n_unassigned": len(cohort.observations) - assigned,
        "rng": None if config.seed is None
               else {"algorithm": RNG_ALGORITHM, "seed": config.seed},
    }
    return ReportTable(metadata=metadata, segments=seg_reports)


_CSV_HEADER = ("segment", "sex", "n_input", "elimination", "n_eliminated",
               "method", "lower", "upper", "lambda1", "lambda2",
               "transform_applied", "flags", "error")


def _csv_bytes(table: ReportTable) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_CSV_HEADER)
    for r in table.records:
        writer.writerow([
            r.segment_label, r.sex, r.n_input, r.elimination, r.n_eliminated,
            r.method,
            "" if r.lower is None else f"{r.lower:.3f}",
            "" if r.upper is None else f"{r.upper:.3f}",
            f"{r.transform.lambda1:.4f}",
            f"{r.transform.lambda2:.6g}",
            int(r.transform.applied),
            ";".join(r.flags),
            r.error or "",
        ])
    return buf.getvalue().encode("utf-8")


def _plotdata_dict(table: ReportTable) -> dict[str, Any]:
    records = []
    for r in table.records:
        if r.error is not None:
            continue
        records.append({"segment": r.segment_label, "sex": r.sex,
                        "elimination": r.elimination, "method": r.method,
                        "midpoint": (r.lower + r.upper) / 2.0,
                        "width": r.upper - r.lower})
    boxplots = []
    for seg in table.segments:
        if seg.summary is None:
            continue
        s = seg.summary
        boxplots.append({"segment": seg.label, "sex": seg.sex, "n": s.n,
                         "min": s.min, "q1": s.q1, "median": s.median,
                         "q3": s.q3, "max": s.max})
    return {"records": records, "boxplots": boxplots}


def emit_report(table: ReportTable, format: str = "json") -> bytes:
    """Serialize a report: full nested ``json``, flat ``csv`` rows, or
    ``plotdata`` (midpoint/width per record plus per-segment five-number
    summaries)."""
    if format == "json":
        return json.dumps(table.to_dict(), indent=2, allow_nan=False).encode("utf-8")
    if format == "csv":
        return _csv_bytes(table)
    if format == "plotdata":
        return json.dumps(_plotdata_dict(table), indent=2,
                          allow_nan=False).encode("utf-8")
    raise ValueError(f"unknown report format {format!r}")


def parse_report(data: bytes | str) -> ReportTable:
    """Parse ``emit_report(..., 'json')`` output back into a ReportTable."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return ReportTable.from_dict(json.loads(data))
