#!/usr/bin/env python3
"""Calibration harness for the bundled synthetic profile.

Sweeps contamination settings and reports, per candidate:

* per-decade Tukey elimination fraction (target band: 2-5%),
* block D/R elimination counts (target: inert, 0 almost everywhere),
* worst pairwise endpoint disagreement among the three methods after
  Tukey elimination, relative to the mean interval width (target <= 5%).

Used to pick the frozen numbers in ``refintervals.synth``; re-run after
any generator change.
"""

from __future__ import annotations

import argparse
import itertools
import warnings
from dataclasses import replace

import numpy as np

from refintervals import RunConfig, generate, iga_profile, run_matrix


def method_disagreement(records) -> float:
    """Worst pairwise endpoint gap after Tukey, relative to mean width."""
    tukey = {r.method: r for r in records if r.elimination == "tukey" and r.error is None}
    worst = 0.0
    for a, b in itertools.combinations(tukey.values(), 2):
        width = ((a.upper - a.lower) + (b.upper - b.lower)) / 2.0
        if width <= 0:
            continue
        worst = max(worst, abs(a.lower - b.lower) / width,
                    abs(a.upper - b.upper) / width)
    return worst


def evaluate(profile, seeds, n_per_group=5000, verbose=False):
    frac_rows, dr_rows, dis_rows = [], [], []
    for seed in seeds:
        cohort = generate(profile, seed=seed, n_per_group=n_per_group)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            table = run_matrix(cohort, RunConfig(seed=seed))
        fracs, drs, dis = [], [], []
        for seg in table.segments:
            fracs.append(seg.eliminations["tukey"]["n_eliminated"] / seg.n)
            drs.append(seg.eliminations["block_dr"]["n_eliminated"])
            dis.append(method_disagreement(seg.records))
        frac_rows.append(fracs)
        dr_rows.append(drs)
        dis_rows.append(dis)
        if verbose:
            print(f"  seed {seed}: tukey% "
                  + " ".join(f"{100*f:.1f}" for f in fracs)
                  + " | dr " + " ".join(str(d) for d in drs)
                  + " | worst-dis " + " ".join(f"{100*d:.1f}" for d in dis))
    frac = np.array(frac_rows)
    dr = np.array(dr_rows)
    dis = np.array(dis_rows)
    in_band = (frac >= 0.02) & (frac <= 0.05)
    return {
        "decades_in_band_per_seed": in_band.sum(axis=1),
        "min_decades_in_band": int(in_band.sum(axis=1).min()),
        "dr_zero_fraction": float((dr == 0).mean()),
        "dr_max": int(dr.max()),
        "worst_disagreement": float(dis.max()),
        "frac_range": (float(frac.min()), float(frac.max())),
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--n-per-group", type=int, default=5000)
    parser.add_argument("--sweep", action="store_true",
                        help="sweep (rate-scale, multiplier) candidates instead "
                             "of only scoring the bundled profile")
    parser.add_argument("--verbose", action="store_true")
    args = parser.parse_args()
    seeds = list(range(args.seeds))

    base = iga_profile()
    candidates = [("bundled", base)]
    if args.sweep:
        for rate_scale, mult in itertools.product((1.0, 1.2, 1.5), (4.5, 6.0, 8.0, 10.0)):
            groups = tuple(replace(g, contamination_rate=min(0.1, g.contamination_rate * rate_scale),
                                   contamination_multiplier=mult)
                           for g in base.groups)
            candidates.append((f"rate*{rate_scale} mult={mult}", replace(base, groups=groups)))

    for name, profile in candidates:
        print(f"== {name}")
        result = evaluate(profile, seeds, args.n_per_group, verbose=args.verbose)
        print("  min decades in [2%,5%] over seeds:", result["min_decades_in_band"],
              "| per seed:", list(result["decades_in_band_per_seed"]))
        print(f"  D/R zero cells: {100*result['dr_zero_fraction']:.1f}%  max: {result['dr_max']}")
        print(f"  worst method disagreement: {100*result['worst_disagreement']:.2f}% "
              f"| tukey frac range: {100*result['frac_range'][0]:.2f}%"
              f" - {100*result['frac_range'][1]:.2f}%")


if __name__ == "__main__":
    main()
