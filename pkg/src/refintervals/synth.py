"""Seeded synthetic cohort generator.

Produces age-structured, right-skewed analyte data resembling serum
IgA so the full pipeline can be exercised and its qualitative behaviour
tested without access to production laboratory data.

Each group draws from a lognormal whose (mu, sigma) are moment-matched
to the group's target mean/sd, mixed with a contamination component
(the same lognormal scaled by the multiplier) at the group's
contamination rate. Ages are uniform within the group, sexes split
50/50. Several groups may cover the same age range; they then act as
strata of one cell, which is how the bundled profile composes a
clean majority with depressed-value subpopulations. Every group
consumes an independent child stream of one root seed (numpy PCG64 via
SeedSequence.spawn), so changing one group's count leaves the other
groups' draws untouched.

Profile files are INI-style key-value text; an optional trailing tag on
the section name distinguishes strata of the same age range::

    [profile]
    family = lognormal

    [group 0-10 a]
    mean = 0.93
    sd = 0.50
    contamination_rate = 0.04
    contamination_multiplier = 0.166667
    count = 2500

The bundled ``iga`` profile is calibrated so that, through the default
pipeline, Tukey fences eliminate roughly 2-5% per decade while block
D/R elimination stays inert, mirroring the behaviour the methods show
on real right-skewed immunoassay data.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .model import Cohort, Observation

RNG_ALGORITHM = "numpy PCG64, SeedSequence.spawn per age group"


@dataclass(frozen=True)
class GroupProfile:
    """Targets for one age group's value distribution."""

    lo: int
    hi: int
    mean: float
    sd: float
    contamination_rate: float = 0.0
    contamination_multiplier: float = 1.0
    count: int = 5000

    def __post_init__(self) -> None:
        if self.lo >= self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi})")
        if self.mean <= 0 or self.sd <= 0:
            raise ValueError("target mean and sd must be positive")
        if not 0.0 <= self.contamination_rate <= 0.1:
            raise ValueError("contamination rate must lie in [0, 0.1]")
        if self.contamination_multiplier <= 0.0:
            raise ValueError("contamination multiplier must be positive")
        if self.count < 1:
            raise ValueError("count must be >= 1")


@dataclass(frozen=True)
class SynthProfile:
    groups: tuple[GroupProfile, ...]
    family: str = "lognormal"

    def __post_init__(self) -> None:
        if self.family != "lognormal":
            raise ValueError(f"only the lognormal family is supported, got {self.family!r}")
        if not self.groups:
            raise ValueError("a profile needs at least one group")


def lognormal_params(mean: float, sd: float) -> tuple[float, float]:
    """(mu, sigma) of the lognormal with the given mean and sd, exactly.

    Solves mean = exp(mu + sigma^2/2) and
    sd^2 = (exp(sigma^2) - 1) exp(2 mu + sigma^2) in closed form; any
    positive mean/sd pair is feasible.
    """
    if mean <= 0 or sd <= 0:
        raise ValueError("mean and sd must be positive")
    sigma2 = math.log1p((sd / mean) ** 2)
    mu = math.log(mean) - sigma2 / 2.0
    return mu, math.sqrt(sigma2)


def generate(profile: SynthProfile, seed: int,
             n_per_group: int | None = None) -> Cohort:
    """Draw a deterministic cohort from ``profile`` under ``seed``.

    ``n_per_group`` overrides every group's count when given.
    """
    root = np.random.SeedSequence(seed)
    children = root.spawn(len(profile.groups))
    observations: list[Observation] = []
    for gi, (group, child) in enumerate(zip(profile.groups, children)):
        rng = np.random.default_rng(child)
        n = n_per_group if n_per_group is not None else group.count
        ages = rng.integers(group.lo, group.hi, size=n)
        mu, sigma = lognormal_params(group.mean, group.sd)
        values = rng.lognormal(mu, sigma, size=n)
        contaminated = rng.random(n) < group.contamination_rate
        values = np.where(contaminated, values * group.contamination_multiplier,
                          values)
        sexes = np.array(["F"] * (n // 2) + ["M"] * (n - n // 2))
        rng.shuffle(sexes)
        observations.extend(
            Observation(f"s{gi}-{j}", int(ages[j]), str(sexes[j]), float(values[j]))
            for j in range(n))
    return Cohort(tuple(observations))


# Frozen default profile. Means track the age ramp of serum IgA in g/L
# (base means sit ~7% above the realized targets because the depressed
# strata pull the mixture mean down); base sds keep the lognormal cv
# near 0.55 per decade. Each decade is two 2500-count strata sharing
# the clean base, contaminated downward at two depths (moderate and
# severe deficiency). The two-depth ladder keeps the Tukey elimination
# fraction stably inside the 2-5% band without opening gaps that would
# wake the block D/R rule, and keeps the three calculation methods in
# close post-elimination agreement.
_IGA_DECADES = (
    (0, 10, 0.93, 0.50),
    (10, 20, 1.56, 0.75),
    (20, 30, 2.10, 1.00),
    (30, 40, 2.26, 1.10),
    (40, 50, 2.31, 1.15),
    (50, 60, 2.37, 1.25),
    (60, 70, 2.42, 1.30),
    (70, 80, 2.53, 1.45),
    (80, 90, 2.64, 1.55),
    (90, 100, 2.85, 1.65),
)
# Per-stratum rates are twice the pooled-decade rate (each stratum is
# half the decade): the mixture carries 4.5% at 1/5 and 4% at 1/14.
_STRATA = ((0.09, 1.0 / 5.0), (0.08, 1.0 / 14.0))

_IGA_GROUPS = tuple(
    GroupProfile(lo, hi, mean=mean, sd=sd, contamination_rate=rate,
                 contamination_multiplier=mult, count=2500)
    for lo, hi, mean, sd in _IGA_DECADES
    for rate, mult in _STRATA
)


def iga_profile() -> SynthProfile:
    """The bundled IgA-like default profile (see module docstring)."""
    return SynthProfile(groups=_IGA_GROUPS)


def dump_profile(profile: SynthProfile) -> str:
    """Serialize a profile to the INI text format ``load_profile`` reads."""
    lines = ["[profile]", f"family = {profile.family}", ""]
    seen: dict[str, int] = {}
    for g in profile.groups:
        rng_key = f"{g.lo}-{g.hi}"
        seen[rng_key] = seen.get(rng_key, 0) + 1
        # Strata sharing an age range need unique section names.
        tag = f" {chr(ord('a') + seen[rng_key] - 1)}" if seen[rng_key] > 1 else ""
        lines += [f"[group {rng_key}{tag}]",
                  f"mean = {g.mean!r}",
                  f"sd = {g.sd!r}",
                  f"contamination_rate = {g.contamination_rate!r}",
                  f"contamination_multiplier = {g.contamination_multiplier!r}",
                  f"count = {g.count}",
                  ""]
    return "\n".join(lines)


def load_profile(source: str | Iterable[str]) -> SynthProfile:
    """Parse a profile from INI text (a string or an open text file)."""
    parser = configparser.ConfigParser()
    if isinstance(source, str):
        parser.read_string(source)
    else:
        parser.read_file(source)
    family = parser.get("profile", "family", fallback="lognormal")
    groups = []
    for section in parser.sections():
        if not section.startswith("group "):
            continue
        age_range = section[len("group "):].split()[0]  # optional stratum tag follows
        try:
            lo_text, hi_text = age_range.split("-")
            lo, hi = int(lo_text), int(hi_text)
        except ValueError:
            raise ValueError(f"bad group section name {section!r}; "
                             f"expected 'group LO-HI [tag]'") from None
        sec = parser[section]
        groups.append(GroupProfile(
            lo=lo, hi=hi,
            mean=sec.getfloat("mean"),
            sd=sec.getfloat("sd"),
            contamination_rate=sec.getfloat("contamination_rate", 0.0),
            contamination_multiplier=sec.getfloat("contamination_multiplier", 1.0),
            count=sec.getint("count", 5000)))
    groups.sort(key=lambda g: (g.lo, g.hi))  # stable: strata keep file order
    return SynthProfile(groups=tuple(groups), family=family)
