"""Reference interval estimation for age/sex-structured analyte data.

The package covers the full workflow: ingesting delimited measurement
files, age/sex partition evaluation (Harris-Boyd), normality gating with
Box-Cox normalization, Tukey and block D/R outlier elimination, and
parametric, non-parametric and robust interval calculation, plus a
seeded synthetic cohort generator for desk-scale experiments.
"""

__version__ = "0.1.0"

from .model import (
    Cohort,
    EliminationResult,
    ExclusionEntry,
    IntervalRecord,
    Observation,
    Segment,
    SummaryStats,
    TransformSpec,
)
from .ingest import IngestError, apply_exclusions, parse_cohort
from .stats import (
    TestResult,
    anderson_darling_normal,
    is_normal,
    ks_lilliefors_normal,
    quantile,
    skewness_test,
    student_t_upper_quantile,
    summarize,
)
from .transform import boxcox_apply, boxcox_fit, boxcox_inverse, normalize_if_needed
from .outlier import block_dr_eliminate, tukey_eliminate
from .estimate import (
    RobustFitDiagnostics,
    biweight_location,
    nonparametric_interval,
    parametric_interval,
    robust_interval,
)
from .partition import (
    HarrisBoydConfig,
    PartitionDecision,
    build_segments,
    compare_sexes,
    harris_boyd_z,
    scan_partitions,
)
from .pipeline import (
    ReportTable,
    RunConfig,
    SegmentReport,
    emit_report,
    parse_report,
    run_cell,
    run_matrix,
)
from .synth import GroupProfile, SynthProfile, generate, iga_profile, load_profile

__all__ = [
    "Cohort",
    "EliminationResult",
    "ExclusionEntry",
    "GroupProfile",
    "HarrisBoydConfig",
    "IngestError",
    "IntervalRecord",
    "Observation",
    "PartitionDecision",
    "ReportTable",
    "RobustFitDiagnostics",
    "RunConfig",
    "Segment",
    "SegmentReport",
    "SummaryStats",
    "SynthProfile",
    "TestResult",
    "TransformSpec",
    "anderson_darling_normal",
    "apply_exclusions",
    "biweight_location",
    "block_dr_eliminate",
    "boxcox_apply",
    "boxcox_fit",
    "boxcox_inverse",
    "build_segments",
    "compare_sexes",
    "emit_report",
    "generate",
    "harris_boyd_z",
    "iga_profile",
    "is_normal",
    "ks_lilliefors_normal",
    "load_profile",
    "nonparametric_interval",
    "normalize_if_needed",
    "parametric_interval",
    "parse_cohort",
    "parse_report",
    "quantile",
    "robust_interval",
    "run_cell",
    "run_matrix",
    "scan_partitions",
    "skewness_test",
    "student_t_upper_quantile",
    "summarize",
    "tukey_eliminate",
]
