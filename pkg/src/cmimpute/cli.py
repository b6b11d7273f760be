"""Command-line interface: impute, simulate, audit.

Exit codes: 0 success, 2 input/config error, 3 degenerate or singular
numeric state.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import __version__
from .dataio import default_threads, load_run_config, read_dataset, write_rows
from .errors import CmimputeError, DegenerateDataError, InvalidInputError, SingularInformationError
from .imputation import Formula, ImputationSpec, Indicator, impute_dataset
from .records import as_arrays
from .simulate import run_scenario
from .survival import fit_cox, kaplan_meier

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

ALL_FORMULAS = [f.value for f in Formula]
ALL_INDICATORS = [i.value for i in Indicator]


def _fit_survival(records):
    _, _, z, _ = as_arrays(records)
    if z.shape[1] == 0:
        return kaplan_meier(records)
    return fit_cox(records)


def cmd_impute(args) -> int:
    records = read_dataset(args.input, allow_extra_cols=args.allow_extra_cols)
    spec = ImputationSpec.parse(args.formula, args.indicator)
    fit = _fit_survival(records)
    imputed = impute_dataset(records, fit, spec, provenance=args.input)

    with open(args.input, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        body = list(reader)
    header += ["x_imputed", "imputation_flag"]
    for i, row in enumerate(body):
        row += [repr(float(imputed.x_imputed[i])), imputed.flags[i]]
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(body)
    return EXIT_OK


def cmd_simulate(args) -> int:
    run = load_run_config(args.config)
    configs = run["configs"]
    if args.seed is not None or args.threads is not None or args.reuse_survival_fit:
        from dataclasses import replace

        configs = [
            replace(
                cfg,
                seed=cfg.seed if args.seed is None else args.seed,
                threads=cfg.threads if args.threads is None else args.threads,
                reuse_survival_fit=cfg.reuse_survival_fit or args.reuse_survival_fit,
            )
            for cfg in configs
        ]

    results = {}
    pooled_rows = []
    audit_rows = []
    for cfg in configs:
        result = run_scenario(cfg)
        results[cfg.log_hr] = result
        rates = result.censoring_rates
        for row in result.pooled:
            pooled_rows.append([
                cfg.log_hr, row.spec.formula.value, row.spec.indicator.value,
                row.replication, row.beta_hat, row.beta_se,
                float(rates[row.replication]),
            ])
        for row in result.audit:
            audit_rows.append([
                cfg.log_hr, row.z_value, row.subject_index, row.censor_time,
                row.spec.formula.value, row.spec.indicator.value, row.imputed,
            ])

    write_rows(run["pooled_path"],
               ["log_hr", "formula", "indicator", "replication",
                "beta_hat", "beta_se", "censoring_rate"],
               pooled_rows)
    write_rows(run["audit_path"],
               ["log_hr", "z", "subject_index", "censor_time",
                "formula", "indicator", "imputed"],
               audit_rows)
    if run["plots_dir"]:
        from .plots import plot_audit, plot_pooled

        os.makedirs(run["plots_dir"], exist_ok=True)
        plot_pooled(results, run["plots_dir"])
        plot_audit(results, run["plots_dir"])
    return EXIT_OK


def cmd_audit(args) -> int:
    records = read_dataset(args.input, allow_extra_cols=args.allow_extra_cols)
    t, delta, z, _ = as_arrays(records)
    censored = np.flatnonzero(delta == 0)
    header = ["subject_index", "censor_time", "formula", "indicator",
              "imputed", "deviation_from_correct_inclusive"]
    if censored.size == 0:
        write_rows(args.output, header, [])
        print("warning: no censored rows; audit table is empty", file=sys.stderr)
        return EXIT_OK

    fit = _fit_survival(records)
    formulas = ALL_FORMULAS if args.all_formulas else [args.formula]
    indicators = ALL_INDICATORS if args.all_formulas else [args.indicator]
    reference = impute_dataset(records, fit, ImputationSpec.parse("correct", "inclusive"))

    rows = []
    for formula in formulas:
        for indicator in indicators:
            spec = ImputationSpec.parse(formula, indicator)
            imputed = impute_dataset(records, fit, spec)
            for i in censored:
                rows.append([
                    int(i), float(t[i]), formula, indicator,
                    float(imputed.x_imputed[i]),
                    float(imputed.x_imputed[i] - reference.x_imputed[i]),
                ])
    write_rows(args.output, header, rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmimpute",
        description="Conditional-mean imputation for right-censored covariates",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_spec_flags(p):
        p.add_argument("--formula", choices=ALL_FORMULAS, default="correct")
        p.add_argument("--indicator", choices=ALL_INDICATORS, default="inclusive")
        p.add_argument("--allow-extra-cols", action="store_true")

    p_imp = sub.add_parser("impute", help="impute censored covariates in a CSV dataset")
    p_imp.add_argument("--input", required=True)
    p_imp.add_argument("--output", required=True)
    add_spec_flags(p_imp)
    p_imp.set_defaults(func=cmd_impute)

    p_sim = sub.add_parser("simulate", help="run a replicated simulation scenario grid")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--threads", type=int, default=None)
    p_sim.add_argument("--reuse-survival-fit", action="store_true")
    p_sim.set_defaults(func=cmd_simulate)

    p_aud = sub.add_parser("audit", help="per-subject comparison of imputation formulas")
    p_aud.add_argument("--input", required=True)
    p_aud.add_argument("--output", required=True)
    p_aud.add_argument("--all-formulas", action="store_true")
    add_spec_flags(p_aud)
    p_aud.set_defaults(func=cmd_audit)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DegenerateDataError, SingularInformationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InvalidInputError, CmimputeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
