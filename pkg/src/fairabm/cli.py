"""Command line: ``fairabm generate|run|explain|report``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError
from .learners.pipelines import VARIANTS
from .runner import (
    FULL_STEPS,
    PIPELINES,
    ExperimentPlan,
    aggregate,
    explain_cell,
    generate_dataset,
    load_plan,
    load_records,
    run_plan,
    scenario_key,
)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="plan file (TOML)")
    p.add_argument("--seed", type=int, help="run a single seed instead of the plan's seeds")
    p.add_argument("--full", action="store_true", help=f"full-length simulations ({FULL_STEPS} steps)")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--pipeline", choices=(*PIPELINES, "both"), default="both")
    p.add_argument("--variant", choices=VARIANTS, help="restrict to one mitigation variant")
    p.add_argument("--workers", type=int, help="scenario jobs run in parallel")
    p.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairabm", description="Simulated lending bias experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="simulate and export the datasets only")
    _add_common(p)

    p = sub.add_parser("run", help="run the experiment plan and write tables and figures")
    _add_common(p)

    p = sub.add_parser("explain", help="export interaction graphs for one finished cell")
    _add_common(p)
    p.add_argument("--lbl", type=float, required=True)
    p.add_argument("--rep", type=float, required=True)
    p.add_argument("--instance", type=int, help="entity id to explain (default: seeded draw from the test rows)")
    p.add_argument("--instance-seed", type=int, default=0)
    p.add_argument("--top-k", type=int, help="keep only the k strongest interactions")

    p = sub.add_parser("report", help="rebuild tables and figures from finished cells")
    _add_common(p)
    return parser


def plan_from_args(args) -> ExperimentPlan:
    plan = load_plan(args.config) if args.config else ExperimentPlan()
    changes = {}
    if args.seed is not None:
        changes["seeds"] = (args.seed,)
    if args.full:
        changes["n_steps"] = FULL_STEPS
    if args.out is not None:
        changes["out_dir"] = str(args.out)
    if args.pipeline != "both":
        changes["pipelines"] = (args.pipeline,)
    if args.variant is not None and args.command != "explain":
        changes["variants"] = (args.variant,)
    if args.workers is not None:
        changes["workers"] = args.workers
    return replace(plan, **changes) if changes else plan


def _cmd_generate(plan: ExperimentPlan, args) -> int:
    for lbl, rep, seed in plan.scenarios():
        rows, fp = generate_dataset(plan, lbl, rep, seed)
        print(f"{scenario_key(lbl, rep, seed)}\t{len(rows)} rows\t{fp[:16]}")
    return 0


def _summary(records) -> None:
    for r in records:
        if r.ok:
            perf, fair = r.performance, r.fairness
            print(
                f"{r.scenario}\t{r.pipeline}\t{r.variant}\tok\tacc={perf['accuracy']:.3f}\t"
                f"auc={perf['roc_auc'] if perf['roc_auc'] is None else round(perf['roc_auc'], 3)}\t"
                f"spd={fair['spd']:+.3f}"
            )
        else:
            print(f"{r.scenario}\t{r.pipeline}\t{r.variant}\tFAILED\t{r.error}")


def _cmd_run(plan: ExperimentPlan, args) -> int:
    result = run_plan(plan)
    _summary(result.records)
    n_failed = result.n_failed
    print(f"{len(result.records)} cells, {n_failed} failed; tables in {plan.out / 'results_tables'}")
    return 0 if n_failed == 0 else 1


def _cmd_explain(plan: ExperimentPlan, args) -> int:
    seed = plan.seeds[0]
    key = scenario_key(args.lbl, args.rep, seed)
    mitigated = args.variant or "eg_dp"
    if mitigated == "none":
        raise ConfigError("--variant for explain names the mitigated model to compare against the baseline")
    for pipeline in plan.pipelines:
        res = explain_cell(
            plan.out,
            key,
            pipeline,
            mitigated,
            entity_id=args.instance,
            seed=args.instance_seed,
            top_k_edges=args.top_k,
            warmup=plan.online.warmup,
        )
        hubs = "\t".join(f"hub[{v}]={h:.3f}" for v, h in res.hubs.items())
        print(f"{key}\t{pipeline}\tentity={res.entity_id}\t{hubs}")
        for p in res.paths:
            print(f"  {p}")
    return 0


def _cmd_report(plan: ExperimentPlan, args) -> int:
    records = load_records(plan.out)
    if not records:
        print(f"no finished cells under {plan.out}", file=sys.stderr)
        return 1
    ranks, written = aggregate(plan.out, records)
    for pipeline, table in ranks.items():
        print(f"[{pipeline}] variant\tperf_1st\tperf_2nd\tfair_1st\tfair_2nd")
        for v, c in table.counts.items():
            print(f"[{pipeline}] {v}\t{c['perf_1st']}\t{c['perf_2nd']}\t{c['fair_1st']}\t{c['fair_2nd']}")
    for p in written:
        print(f"  {p}")
    n_failed = sum(not r.ok for r in records)
    return 0 if n_failed == 0 else 1


COMMANDS = {"generate": _cmd_generate, "run": _cmd_run, "explain": _cmd_explain, "report": _cmd_report}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        plan = plan_from_args(args)
        return COMMANDS[args.command](plan, args)
    except (ConfigError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
