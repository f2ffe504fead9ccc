"""Command-line entry point.

Exit status: 0 when every check passes, 1 when any check fails, 2 on bad
input (unreadable or invalid files, bad arguments).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .analysis import covariance_condition, exemplar_condition, is_complementary, n2_condition
from .errors import InfeasibleConstraints
from .fairness import BASELINES, benefit_exclusion_check, disparity_containment, disparity_lower_bound
from .falsify import CONDITIONS, falsification_sweep
from .model import combine, monte_carlo_average, validate_assumptions
from .optimize import WeightConstraintSet, complementarity_sweep, optimal_tabular_weights
from .report import analyze, csv_text, export_csv
from .reproduce import TARGETS, reproduce, sweep_threshold_check
from .rules import Exemplar, Tabular
from .scenario import load_scenario, load_sweep_config

OK, FAILED, BAD_INPUT = 0, 1, 2

LEMMAS = ("complementarity", "assumptions", "n2-threshold", "covariance", "exemplar",
          "benefit-exclusion", "disparity-lower-bound", "disparity-containment")


class InputError(Exception):
    pass


def _emit(args, text: str, payload) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    scenario = load_scenario(args.scenario)
    report = analyze(scenario)
    text, payload = report.text(), report.to_dict()
    if args.monte_carlo:
        est = monte_carlo_average(scenario.system, scenario.combiner, args.monte_carlo, args.seed)
        text += (f"monte carlo: {est.mean:.6f} +/- {est.stderr:.6f} "
                 f"({est.samples} samples, seed {args.seed})\n")
        payload["monte_carlo"] = {"mean": est.mean, "stderr": est.stderr,
                                  "samples": est.samples, "seed": args.seed}
    if args.csv:
        export_csv(report, args.csv)
    _emit(args, text, payload)
    return OK if report.assumptions.satisfied else FAILED


def _lemma_reports(scenario, lemma: str):
    system, rule = scenario.system, scenario.combiner
    combined = combine(system, rule)
    if lemma == "complementarity":
        return [is_complementary(system, rule, combined)]
    if lemma == "assumptions":
        return [validate_assumptions(system, combined)]
    if lemma == "n2-threshold":
        if system.n != 2:
            raise InputError("n2-threshold needs a two-regime scenario")
        return [n2_condition(system, rule, combined)]
    if lemma == "covariance":
        return [covariance_condition(system, rule, combined)]
    if lemma == "exemplar":
        if not isinstance(rule, Exemplar) or system.n != 2 or rule.m <= 0:
            raise InputError("exemplar needs a two-regime scenario with an exemplar "
                             "combiner and m > 0")
        return [exemplar_condition(system, rule.b, rule.m)]
    if lemma == "benefit-exclusion":
        return [benefit_exclusion_check(system, rule, b, combined) for b in BASELINES]
    if lemma == "disparity-lower-bound":
        return [disparity_lower_bound(system, rule, combined)]
    return [disparity_containment(system, rule, combined)]


def cmd_check(args) -> int:
    scenario = load_scenario(args.scenario)
    reports, skipped = [], []
    for lemma in (LEMMAS if args.lemma == "all" else (args.lemma,)):
        try:
            reports.extend(_lemma_reports(scenario, lemma))
        except InputError as exc:
            if args.lemma != "all":
                raise
            skipped.append(f"{lemma}: not applicable ({exc})")
    lines = []
    for r in reports:
        lines.append(r.summary())
        lines.extend(f"  {n}" for n in r.notes)
    lines.extend(f"skipped {s}" for s in skipped)
    _emit(args, "\n".join(lines) + "\n",
          {"reports": [r.to_dict() for r in reports], "skipped": skipped})
    return OK if all(r.satisfied for r in reports) else FAILED


def cmd_optimize(args) -> int:
    scenario = load_scenario(args.scenario)
    constraints = WeightConstraintSet(max_combined_disparity=args.max_disparity,
                                      require_benefit=args.require_benefit)
    system = scenario.system
    try:
        result = optimal_tabular_weights(system, constraints)
    except InfeasibleConstraints as exc:
        _emit(args, f"infeasible: {exc}\n",
              {"feasible": False, "message": str(exc), "constraints": list(exc.constraints)})
        return FAILED
    comp = is_complementary(system, Tabular(tuple(result.weights)))
    weights = " ".join(f"{w:.6f}" for w in result.weights)
    text = (f"weights: {weights}\n"
            f"combined average: {result.average:.6f}\n"
            f"complementary: {'yes' if comp.satisfied else 'no'} (gap {comp.details['gap']:.3f})\n"
            f"strict: {'yes' if result.strict else 'no'}\n"
            f"active: {', '.join(result.active) or 'none'}\n")
    text += "".join(f"note: {n}\n" for n in result.notes)
    _emit(args, text, {"feasible": True, "weights": result.weights.tolist(),
                       "average": result.average, "strict": result.strict,
                       "active": result.active, "notes": result.notes,
                       "complementary": comp.satisfied})
    return OK


def cmd_sweep(args) -> int:
    grids = load_sweep_config(args.config)
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    status = OK
    for label, grid in grids:
        result = complementarity_sweep(grid)
        count, unexplained = sweep_threshold_check(result)
        print(f"{label}: {int(result.masked.sum())} masked, {count} complementary, "
              f"{len(unexplained)} unexplained")
        if unexplained:
            status = FAILED
        if out:
            export_csv(result, out / f"{label}.csv")
    return status


def cmd_reproduce(args) -> int:
    targets = TARGETS if args.target == "all" else (args.target,)
    status = OK
    for target in targets:
        result = reproduce(target, golden=args.golden, update=args.update_golden)
        sys.stdout.write(result.text())
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            files = dict(result.csv_files)
            if not files:
                files[f"{target}.csv"] = csv_text(result.artifact)
            for name, data in files.items():
                (out / name).write_bytes(data.encode())
        if not result.passed:
            status = FAILED
    return status


def cmd_falsify(args) -> int:
    ids = sorted(CONDITIONS) if args.lemma == "all" else [args.lemma]
    status = OK
    for cid in ids:
        result = falsification_sweep(cid, args.trials, seed=args.seed, workers=args.workers)
        print(f"{cid}: {result.trials} trials, {result.exercised} exercised, "
              f"{len(result.counterexamples)} counterexamples (seed {args.seed})")
        for ce in result.counterexamples[:5]:
            print(f"  {ce}")
        if not result.passed:
            status = FAILED
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="complementarity",
                                     description="Loss-level analysis of human-algorithm systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="render the per-regime table and every analysis")
    p.add_argument("scenario", help="scenario JSON file or builtin name (table1..table6)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--csv", help="also write the regime table as CSV")
    p.add_argument("--monte-carlo", type=int, default=0, metavar="N",
                   help="add a sampled estimate of the combined average")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("check", help="evaluate one condition or all of them")
    p.add_argument("scenario")
    p.add_argument("--lemma", required=True, choices=(*LEMMAS, "all"))
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("optimize", help="best per-regime weights under constraints")
    p.add_argument("scenario")
    p.add_argument("--max-disparity", type=float, metavar="E")
    p.add_argument("--require-benefit", choices=BASELINES)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", help="complementarity over a variability grid")
    p.add_argument("config")
    p.add_argument("--out", help="directory for one CSV per combiner")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("reproduce", help="rebuild a reference table or figure")
    p.add_argument("target", choices=(*TARGETS, "all"))
    p.add_argument("--out", help="directory for the CSV output")
    p.add_argument("--golden", help="directory of golden CSVs (default: packaged)")
    p.add_argument("--update-golden", action="store_true",
                   help="overwrite the golden CSVs with the current output")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("falsify", help="random counterexample search")
    p.add_argument("--lemma", required=True, choices=(*sorted(CONDITIONS), "all"))
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_falsify)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="warning: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ValueError, OSError) as exc:
        # ScenarioError and the model's validation errors are ValueErrors
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
