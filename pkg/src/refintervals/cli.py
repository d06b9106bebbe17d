"""Command line interface.

Subcommands:

* ``run``: ingest a delimited file, run the elimination x method matrix
  and write the report (json, csv or plotdata).
* ``synth``: generate a seeded synthetic cohort CSV that ``run`` can
  ingest.
* ``partition-scan``: evaluate the Harris-Boyd criterion over candidate
  age partitions (and optionally F vs M per cell) and emit the decision
  table.

Exit codes: 0 success, 1 usage error, 2 input error, 3 partial report
(some cells carry error markers).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Sequence

from .ingest import IngestError, apply_exclusions, parse_cohort
from .model import Cohort
from .partition import DEFAULT_WIDTHS, compare_sexes, scan_partitions
from .pipeline import RunConfig, emit_report, run_matrix
from .synth import RNG_ALGORITHM, generate, iga_profile, load_profile

_ELIM_ALIASES = {"none": "none", "tukey": "tukey",
                 "dr": "block_dr", "block_dr": "block_dr"}
_METHOD_ALIASES = {"para": "parametric", "parametric": "parametric",
                   "nonpara": "nonparametric", "nonparametric": "nonparametric",
                   "robust": "robust"}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this CLI reserves 2 for input errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _alias_list(aliases: dict[str, str], what: str):
    def parse(text: str) -> tuple[str, ...]:
        out = []
        for token in text.split(","):
            token = token.strip().lower()
            if token not in aliases:
                raise argparse.ArgumentTypeError(
                    f"unknown {what} {token!r}; choose from {sorted(set(aliases))}")
            out.append(aliases[token])
        return tuple(out)
    return parse


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _max_age(text: str):
    if text.lower() in ("none", "inf"):
        return None
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'none', got {text!r}")


def _write_out(path: str, data: bytes) -> None:
    if path == "-":
        sys.stdout.buffer.write(data)
    else:
        Path(path).write_bytes(data)


def _add_input_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="delimited input file")
    p.add_argument("--age-col", default="age")
    p.add_argument("--sex-col", default="sex")
    p.add_argument("--value-col", default="value")
    p.add_argument("--id-col", default=None)
    p.add_argument("--delimiter", default=",")
    p.add_argument("--max-age", type=_max_age, default=100,
                   help="exclude ages >= this (default 100; 'none' disables)")


def _load_cohort(args) -> Cohort:
    schema = {"age": args.age_col, "sex": args.sex_col, "value": args.value_col}
    if args.id_col:
        schema["id"] = args.id_col
    with open(args.input, newline="", encoding="utf-8") as fh:
        cohort = parse_cohort(fh, schema, delimiter=args.delimiter)
    return apply_exclusions(cohort, max_age=args.max_age)


def _cmd_run(args) -> int:
    cohort = _load_cohort(args)
    config = RunConfig(width=args.width, cuts=args.cuts, by_sex=args.by_sex,
                       eliminations=args.elim, methods=args.methods,
                       alpha=args.alpha, transform=args.transform,
                       dr_iterate=not args.dr_one_shot)
    table = run_matrix(cohort, config)
    _write_out(args.out, emit_report(table, args.format))
    errored = [r for r in table.records if r.error is not None]
    if errored:
        print(f"{len(errored)} of {len(table.records)} cells carry error markers",
              file=sys.stderr)
        return 3
    return 0


def _cmd_synth(args) -> int:
    if args.profile == "iga":
        profile = iga_profile()
    else:
        with open(args.profile, encoding="utf-8") as fh:
            profile = load_profile(fh)
    cohort = generate(profile, seed=args.seed, n_per_group=args.n_per_group)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["subject_id", "age", "sex", "value"])
    for obs in cohort.observations:
        writer.writerow([obs.subject_id, obs.age, obs.sex, repr(obs.value)])
    _write_out(args.out, buf.getvalue().encode("utf-8"))
    print(f"generated {len(cohort.observations)} observations "
          f"({RNG_ALGORITHM}, seed {args.seed})", file=sys.stderr)
    return 0


_SCAN_CSV_HEADER = ("scheme", "sex_filter", "left", "right", "n1", "mean1", "sd1",
                    "n2", "mean2", "sd2", "z", "z_star", "partition_required")


def _cmd_partition_scan(args) -> int:
    cohort = _load_cohort(args)
    decisions = scan_partitions(cohort, widths=args.widths, per_sex=args.per_sex,
                                nonuniform=args.nonuniform, pairs=args.pairs)
    if args.compare_sexes:
        decisions.extend(compare_sexes(cohort, widths=args.widths))
    if args.format == "json":
        data = json.dumps([d.to_dict() for d in decisions], indent=2).encode("utf-8")
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(_SCAN_CSV_HEADER)
        for d in decisions:
            writer.writerow([d.scheme, d.sex_filter, d.left_label, d.right_label,
                             d.n1, f"{d.mean1:.4f}", f"{d.sd1:.4f}",
                             d.n2, f"{d.mean2:.4f}", f"{d.sd2:.4f}",
                             f"{d.z:.4f}", f"{d.z_star:.4f}",
                             int(d.partition_required)])
        data = buf.getvalue().encode("utf-8")
    _write_out(args.out, data)
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="refintervals",
                     description="Reference interval estimation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[], help="compute the interval report")
    _add_input_options(run)
    group = run.add_mutually_exclusive_group()
    group.add_argument("--width", type=int, default=10,
                       help="uniform age partition width in years (default 10)")
    group.add_argument("--cuts", type=_int_list, default=None,
                       help="explicit age cut points, e.g. 0,10,20,...")
    run.add_argument("--by-sex", action="store_true")
    run.add_argument("--elim", type=_alias_list(_ELIM_ALIASES, "elimination"),
                     default=("none", "tukey", "block_dr"),
                     help="comma list from none,tukey,dr (default all)")
    run.add_argument("--methods", type=_alias_list(_METHOD_ALIASES, "method"),
                     default=("parametric", "nonparametric", "robust"),
                     help="comma list from para,nonpara,robust (default all)")
    run.add_argument("--alpha", type=float, default=0.05)
    run.add_argument("--transform", choices=("auto", "force", "off"), default="auto")
    run.add_argument("--dr-one-shot", action="store_true",
                     help="apply the block D/R rule once per tail instead of iterating")
    run.add_argument("--out", required=True, help="output path ('-' for stdout)")
    run.add_argument("--format", choices=("json", "csv", "plotdata"), default="json")
    run.set_defaults(func=_cmd_run)

    synth = sub.add_parser("synth", help="generate a synthetic cohort CSV")
    synth.add_argument("--profile", default="iga",
                       help="'iga' or a path to a profile file (default iga)")
    synth.add_argument("--n-per-group", type=int, default=None)
    synth.add_argument("--seed", type=int, required=True)
    synth.add_argument("--out", required=True, help="output path ('-' for stdout)")
    synth.set_defaults(func=_cmd_synth)

    scan = sub.add_parser("partition-scan", help="Harris-Boyd partition evaluation")
    _add_input_options(scan)
    scan.add_argument("--widths", type=_int_list, default=DEFAULT_WIDTHS,
                      help="comma list of candidate widths "
                           f"(default {','.join(map(str, DEFAULT_WIDTHS))})")
    scan.add_argument("--per-sex", action="store_true",
                      help="scan F and M separately instead of pooled")
    scan.add_argument("--nonuniform", action="store_true",
                      help="also scan 1-year cells to age 15 then 20-year cells")
    scan.add_argument("--compare-sexes", action="store_true",
                      help="also compare F vs M within each age cell")
    scan.add_argument("--pairs", choices=("adjacent", "all"), default="adjacent")
    scan.add_argument("--out", required=True, help="output path ('-' for stdout)")
    scan.add_argument("--format", choices=("csv", "json"), default="csv")
    scan.set_defaults(func=_cmd_partition_scan)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (IngestError, OSError, ValueError) as exc:
        print(f"refintervals: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
