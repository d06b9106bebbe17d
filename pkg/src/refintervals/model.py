"""Core domain records shared across the package.

Pure data: constructors enforce invariants, every type serializes to the
JSON report schema (``to_dict``) and parses back identically
(``from_dict``). No statistics live here.

Conventions fixed by these types:

* ages are completed integer years; partition cells are half-open
  ``[lo, hi)`` so every age belongs to exactly one cell;
* analyte values are non-negative reals (zero is legal);
* sex is one of ``"F"``, ``"M"``, ``"unknown"``; records with unknown
  sex participate in pooled segments and are dropped when filtering by
  a specific sex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

SEXES = ("F", "M", "unknown")
SEX_FILTERS = ("F", "M", "both")
PROCEDURES = ("none", "tukey", "block_dr")
METHODS = ("parametric", "nonparametric", "robust")

# Closed set of reasons a raw input row can be excluded from a cohort.
# bad_sex_code is part of the schema but unused by the current policy,
# which maps unrecognized sex codes to "unknown" without excluding.
EXCLUSION_REASONS = (
    "missing_age",
    "missing_value",
    "non_numeric",
    "negative_value",
    "age_cutoff",
    "bad_sex_code",
)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)


@dataclass(frozen=True)
class Observation:
    """One analyte measurement with the subject's age and sex."""

    subject_id: str
    age: int
    sex: str
    value: float

    def __post_init__(self) -> None:
        _require(isinstance(self.age, int) and self.age >= 0,
                 f"age must be a non-negative integer, got {self.age!r}")
        _require(self.sex in SEXES, f"sex must be one of {SEXES}, got {self.sex!r}")
        _require(math.isfinite(self.value) and self.value >= 0,
                 f"value must be a finite non-negative real, got {self.value!r}")

    def to_dict(self) -> dict[str, Any]:
        return {"subject_id": self.subject_id, "age": self.age,
                "sex": self.sex, "value": self.value}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Observation":
        return cls(str(d["subject_id"]), int(d["age"]), str(d["sex"]), float(d["value"]))


@dataclass(frozen=True)
class ExclusionEntry:
    """A raw input row that was excluded, with the reason code."""

    row: tuple[str, ...]
    reason: str

    def __post_init__(self) -> None:
        _require(self.reason in EXCLUSION_REASONS,
                 f"reason must be one of {EXCLUSION_REASONS}, got {self.reason!r}")

    def to_dict(self) -> dict[str, Any]:
        return {"row": list(self.row), "reason": self.reason}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ExclusionEntry":
        return cls(tuple(str(c) for c in d["row"]), str(d["reason"]))


@dataclass(frozen=True)
class Cohort:
    """A validated collection of observations plus the exclusion audit log.

    ``len(observations) + len(exclusion_log)`` always equals the number
    of input rows the cohort was built from.
    """

    observations: tuple[Observation, ...]
    exclusion_log: tuple[ExclusionEntry, ...] = ()

    def __len__(self) -> int:
        return len(self.observations)

    def to_dict(self) -> dict[str, Any]:
        return {"observations": [o.to_dict() for o in self.observations],
                "exclusion_log": [e.to_dict() for e in self.exclusion_log]}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Cohort":
        return cls(tuple(Observation.from_dict(o) for o in d["observations"]),
                   tuple(ExclusionEntry.from_dict(e) for e in d["exclusion_log"]))


@dataclass(frozen=True)
class Segment:
    """One age(-sex) partition cell's values, the unit statistics operate on.

    The age range is half-open: an observation contributes iff
    ``lo <= age < hi`` and its sex matches ``sex_filter``.
    """

    lo: int
    hi: int
    sex_filter: str
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        _require(self.lo < self.hi, f"need lo < hi, got [{self.lo}, {self.hi})")
        _require(self.sex_filter in SEX_FILTERS,
                 f"sex_filter must be one of {SEX_FILTERS}, got {self.sex_filter!r}")
        _require(all(math.isfinite(v) for v in self.values),
                 "segment values must be finite")

    @property
    def label(self) -> str:
        return f"{self.lo}-{self.hi}"

    @property
    def n(self) -> int:
        return len(self.values)

    def to_dict(self) -> dict[str, Any]:
        return {"lo": self.lo, "hi": self.hi, "sex_filter": self.sex_filter,
                "values": list(self.values)}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Segment":
        return cls(int(d["lo"]), int(d["hi"]), str(d["sex_filter"]),
                   tuple(float(v) for v in d["values"]))


@dataclass(frozen=True)
class TransformSpec:
    """Fitted power-transform parameters and whether a transform applies.

    ``applied=False`` is the identity convention: lambda1 = 1,
    lambda2 = 0. lambda2 may be positive only for segments containing
    values <= 0 (the two-parameter shift case).
    """

    applied: bool
    lambda1: float = 1.0
    lambda2: float = 0.0
    loglik: float = 0.0

    def __post_init__(self) -> None:
        if not self.applied:
            _require(self.lambda1 == 1.0 and self.lambda2 == 0.0,
                     "identity spec must have lambda1=1, lambda2=0")
        _require(self.lambda2 >= 0, f"lambda2 must be >= 0, got {self.lambda2!r}")

    def to_dict(self) -> dict[str, Any]:
        return {"applied": self.applied, "lambda1": self.lambda1,
                "lambda2": self.lambda2, "loglik": self.loglik}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "TransformSpec":
        return cls(bool(d["applied"]), float(d["lambda1"]),
                   float(d["lambda2"]), float(d["loglik"]))


IDENTITY_TRANSFORM = TransformSpec(applied=False)


@dataclass(frozen=True)
class EliminationResult:
    """Outcome of one outlier-elimination procedure on one value set.

    ``retained + eliminated_low + eliminated_high`` is the input
    multiset; eliminations are contiguous tail blocks in sorted order.
    ``diagnostics`` holds the fence values (Tukey) or per-pass gap/range
    ratios (block D/R), JSON-safe.
    """

    procedure: str
    retained: tuple[float, ...]
    eliminated_low: tuple[float, ...]
    eliminated_high: tuple[float, ...]
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        _require(self.procedure in PROCEDURES,
                 f"procedure must be one of {PROCEDURES}, got {self.procedure!r}")
        if self.eliminated_low and self.retained:
            _require(max(self.eliminated_low) < min(self.retained),
                     "low eliminations must all lie below the retained values")
        if self.eliminated_high and self.retained:
            _require(max(self.retained) < min(self.eliminated_high),
                     "high eliminations must all lie above the retained values")

    @property
    def n_eliminated(self) -> int:
        return len(self.eliminated_low) + len(self.eliminated_high)

    def to_dict(self) -> dict[str, Any]:
        return {"procedure": self.procedure, "retained": list(self.retained),
                "eliminated_low": list(self.eliminated_low),
                "eliminated_high": list(self.eliminated_high),
                "diagnostics": self.diagnostics}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "EliminationResult":
        return cls(str(d["procedure"]),
                   tuple(float(v) for v in d["retained"]),
                   tuple(float(v) for v in d["eliminated_low"]),
                   tuple(float(v) for v in d["eliminated_high"]),
                   dict(d["diagnostics"]))


@dataclass(frozen=True)
class SummaryStats:
    """Descriptive statistics for one segment (Table-style summary row)."""

    n: int
    mean: float
    sd: float
    median: float
    mad: float
    q1: float
    q3: float
    skewness: float
    min: float
    max: float

    def __post_init__(self) -> None:
        _require(self.n >= 1, "n must be >= 1")
        _require(self.sd >= 0, "sd must be >= 0")
        _require(self.mad >= 0, "mad must be >= 0")
        _require(self.q1 <= self.median <= self.q3,
                 "quartiles must satisfy q1 <= median <= q3")

    def to_dict(self) -> dict[str, Any]:
        return {"n": self.n, "mean": self.mean, "sd": self.sd,
                "median": self.median, "mad": self.mad, "q1": self.q1,
                "q3": self.q3, "skewness": self.skewness,
                "min": self.min, "max": self.max}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "SummaryStats":
        return cls(n=int(d["n"]), mean=float(d["mean"]), sd=float(d["sd"]),
                   median=float(d["median"]), mad=float(d["mad"]),
                   q1=float(d["q1"]), q3=float(d["q3"]),
                   skewness=float(d["skewness"]),
                   min=float(d["min"]), max=float(d["max"]))


@dataclass(frozen=True)
class IntervalRecord:
    """One (segment, elimination, method) -> (lower, upper) result.

    A failed cell carries ``error`` and null endpoints instead of
    aborting the whole report matrix. Endpoints are on the original
    measurement scale, lower clamped at 0 (concentrations cannot be
    negative); lower == upper only for degenerate constant data.
    """

    segment_label: str
    sex: str
    n_input: int
    elimination: str
    n_eliminated: int
    method: str
    lower: float | None
    upper: float | None
    transform: TransformSpec
    flags: tuple[str, ...] = ()
    error: str | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        _require(self.elimination in PROCEDURES,
                 f"elimination must be one of {PROCEDURES}")
        _require(self.method in METHODS, f"method must be one of {METHODS}")
        if self.error is None:
            _require(self.lower is not None and self.upper is not None,
                     "a non-error record must have both endpoints")
            _require(self.lower <= self.upper, "need lower <= upper")
            _require(self.lower >= 0, "lower endpoint must be >= 0 after clamping")

    def to_dict(self) -> dict[str, Any]:
        return {"segment_label": self.segment_label, "sex": self.sex,
                "n_input": self.n_input, "elimination": self.elimination,
                "n_eliminated": self.n_eliminated, "method": self.method,
                "lower": self.lower, "upper": self.upper,
                "transform": self.transform.to_dict(),
                "flags": list(self.flags), "error": self.error,
                "diagnostics": self.diagnostics}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "IntervalRecord":
        return cls(segment_label=str(d["segment_label"]), sex=str(d["sex"]),
                   n_input=int(d["n_input"]), elimination=str(d["elimination"]),
                   n_eliminated=int(d["n_eliminated"]), method=str(d["method"]),
                   lower=None if d["lower"] is None else float(d["lower"]),
                   upper=None if d["upper"] is None else float(d["upper"]),
                   transform=TransformSpec.from_dict(d["transform"]),
                   flags=tuple(str(f) for f in d["flags"]),
                   error=None if d["error"] is None else str(d["error"]),
                   diagnostics=dict(d["diagnostics"]))
