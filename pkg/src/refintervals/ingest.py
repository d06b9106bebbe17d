"""Delimited-text ingestion with an audit-grade exclusion log.

Every input row either becomes an :class:`Observation` or lands in the
cohort's exclusion log with one reason code from the closed set in
:mod:`refintervals.model`:

    missing_age     age cell empty
    missing_value   value cell empty
    non_numeric     age not a non-negative integer, or value not a
                    finite number
    negative_value  value parsed but is negative
    age_cutoff      age >= the configured maximum (default 100)
    bad_sex_code    reserved; unrecognized sex codes currently map to
                    "unknown" and the row is retained

Sex codes are accepted case-insensitively from {F, M, FEMALE, MALE}.
Decimal values use '.' only; there is no locale handling.
"""

from __future__ import annotations

import csv
import math
from typing import Iterable, Mapping

from .model import Cohort, ExclusionEntry, Observation

_SEX_CODES = {"f": "F", "female": "F", "m": "M", "male": "M"}


class IngestError(Exception):
    """Fatal input problem: unreadable stream, missing column, nothing retained."""


def _parse_age(text: str) -> int | None:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        f = float(text)
    except ValueError:
        return None
    return int(f) if math.isfinite(f) and f.is_integer() else None


def _parse_value(text: str) -> float | None:
    try:
        v = float(text)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def parse_cohort(source: Iterable[str], schema: Mapping[str, str],
                 delimiter: str = ",") -> Cohort:
    """Parse a delimited text stream (header row required) into a Cohort.

    ``schema`` maps the logical fields ``age``, ``sex``, ``value`` (and
    optionally ``id``) to column names. Row order is preserved and
    every input row is accounted for: retained + excluded = input rows.
    """
    for field in ("age", "sex", "value"):
        if field not in schema:
            raise IngestError(f"schema is missing the {field!r} column mapping")
    reader = csv.reader(iter(source), delimiter=delimiter)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise IngestError("input is empty: missing header row") from None

    index: dict[str, int] = {}
    for field in ("age", "sex", "value", "id"):
        name = schema.get(field)
        if name is None:
            continue
        if name not in header:
            raise IngestError(f"configured column {name!r} not found in header {header}")
        index[field] = header.index(name)

    observations: list[Observation] = []
    log: list[ExclusionEntry] = []
    row_num = 0
    for row in reader:
        if not row:
            continue  # blank line, not a record
        row_num += 1
        raw = tuple(row)

        def cell(field: str) -> str:
            i = index.get(field)
            return row[i].strip() if i is not None and i < len(row) else ""

        age_text, value_text = cell("age"), cell("value")
        if age_text == "":
            log.append(ExclusionEntry(raw, "missing_age"))
            continue
        if value_text == "":
            log.append(ExclusionEntry(raw, "missing_value"))
            continue
        age = _parse_age(age_text)
        if age is None or age < 0:
            log.append(ExclusionEntry(raw, "non_numeric"))
            continue
        value = _parse_value(value_text)
        if value is None:
            log.append(ExclusionEntry(raw, "non_numeric"))
            continue
        if value < 0:
            log.append(ExclusionEntry(raw, "negative_value"))
            continue
        sex = _SEX_CODES.get(cell("sex").lower(), "unknown")
        subject_id = cell("id") or f"row{row_num}"
        observations.append(Observation(subject_id, age, sex, value))

    if not observations:
        raise IngestError("no rows were retained from the input")
    return Cohort(tuple(observations), tuple(log))


def apply_exclusions(cohort: Cohort, max_age: int | None = 100) -> Cohort:
    """Move observations with age >= max_age into the exclusion log.

    ``max_age=None`` disables the cutoff (identity). An empty result is
    permitted here; the estimators reject empty segments later.
    """
    if max_age is None:
        return cohort
    retained = []
    log = list(cohort.exclusion_log)
    for obs in cohort.observations:
        if obs.age >= max_age:
            log.append(ExclusionEntry(
                (obs.subject_id, str(obs.age), obs.sex, repr(obs.value)),
                "age_cutoff"))
        else:
            retained.append(obs)
    return Cohort(tuple(retained), tuple(log))
