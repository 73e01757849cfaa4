"""Command line entry point: single runs, full campaigns, traces, scenario management."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .core import (
    BUILTIN_SCENARIOS,
    InvalidConfig,
    RolloutReward,
    ScenarioConfig,
    UnknownScenario,
    builtin_scenario,
    scenario_from_dict,
    scenario_to_dict,
    validate_config,
)
from .harness import (
    POLICY_NAMES,
    aggregate,
    make_policy,
    run_episode,
    run_experiment,
    write_decision_trace_csv,
    write_matrix_csv,
    write_runs_csv,
    write_summary_csv,
    write_summary_json,
)

OUT_DIR_ENV = "DUALMIND_OUT"


def _default_out() -> str:
    return os.environ.get(OUT_DIR_ENV, "out")


def _resolve_scenario(name_or_path: str) -> tuple[str, ScenarioConfig]:
    """A builtin scenario name, or a path to a scenario JSON file."""
    if name_or_path in BUILTIN_SCENARIOS:
        return name_or_path, builtin_scenario(name_or_path)
    path = Path(name_or_path)
    if path.exists():
        with open(path) as fh:
            doc = json.load(fh)
        return path.stem, scenario_from_dict(doc)
    raise UnknownScenario(
        f"unknown scenario {name_or_path!r}; builtin names: {', '.join(BUILTIN_SCENARIOS)}"
        " (or pass a scenario JSON file path)"
    )


def _apply_overrides(cfg: ScenarioConfig, args: argparse.Namespace) -> ScenarioConfig:
    overrides = {"base_seed": args.seed}
    if getattr(args, "steps", None) is not None:
        overrides["steps"] = args.steps
    if getattr(args, "horizon", None) is not None:
        overrides["horizon"] = args.horizon
    if getattr(args, "rollout_reward", None) is not None:
        overrides["rollout_reward_mode"] = RolloutReward(args.rollout_reward)
    return validate_config(replace(cfg, **overrides))


def _ensure_out(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args: argparse.Namespace) -> int:
    name, cfg = _resolve_scenario(args.scenario)
    cfg = _apply_overrides(cfg, args)
    out = _ensure_out(args)
    records = run_experiment(
        scenarios=[(name, cfg)],
        policies=[args.policy],
        runs=args.runs,
        paired=not args.independent_traffic,
        workers=args.workers,
    )
    aggs = aggregate(records)
    write_runs_csv(out / "runs.csv", records)
    write_summary_csv(out / "summary.csv", aggs)
    write_summary_json(
        out / "summary.json",
        aggs,
        metadata={
            "scenario": name,
            "policy": args.policy,
            "runs": args.runs,
            "steps": cfg.steps,
            "base_seed": cfg.base_seed,
            "paired_traffic": not args.independent_traffic,
        },
    )
    agg = aggs[0]
    print(
        f"{args.policy} on {name}: throughput {agg.throughput_mean:.4f} pkt/slot, "
        f"avg queue {agg.queue_mean:.3f}, avg delay {agg.delay_mean:.3f}, "
        f"violations {agg.violations_mean:.2f}, drops {agg.drops_mean:.2f} "
        f"(mean over {args.runs} runs)"
    )
    print(f"wrote {out / 'runs.csv'}, {out / 'summary.csv'}, {out / 'summary.json'}")
    return 0


def cmd_campaign(args: argparse.Namespace) -> int:
    out = _ensure_out(args)
    records = run_experiment(
        scenarios=BUILTIN_SCENARIOS,
        policies=POLICY_NAMES,
        runs=args.runs,
        base_seed=args.seed,
        steps=args.steps,
        paired=not args.independent_traffic,
        workers=args.workers,
    )
    aggs = aggregate(records)
    write_runs_csv(out / "runs.csv", records)
    write_summary_csv(out / "summary.csv", aggs)
    write_summary_json(
        out / "summary.json",
        aggs,
        metadata={
            "scenarios": list(BUILTIN_SCENARIOS),
            "policies": list(POLICY_NAMES),
            "runs": args.runs,
            "base_seed": args.seed,
            "paired_traffic": not args.independent_traffic,
        },
    )
    print(
        f"campaign complete: {len(records)} runs, {len(aggs)} (scenario, policy) rows; "
        f"wrote {out / 'summary.csv'} and {out / 'summary.json'}"
    )
    return 0


def cmd_trace(args: argparse.Namespace) -> int:
    name, cfg = _resolve_scenario(args.scenario)
    cfg = validate_config(replace(cfg, base_seed=args.seed))
    out = _ensure_out(args)
    policy = make_policy("dmwm", cfg)
    record = run_episode(cfg, policy, args.run_index, scenario=name)
    write_matrix_csv(out / "schedule.csv", record.schedule_matrix.astype(int))
    write_matrix_csv(out / "model_error.csv", record.model_error_matrix)
    write_matrix_csv(out / "queue_lengths.csv", record.queue_lengths)
    write_decision_trace_csv(out / "decisions.csv", record.decision_trace)
    slow = sum(1 for rec in record.decision_trace if rec.provenance.value == "slow_mind")
    print(
        f"traced dmwm on {name} (seed {args.seed}, run {args.run_index}): "
        f"{slow}/{cfg.steps} slots planned, throughput {record.metrics.throughput:.4f} pkt/slot"
    )
    print(f"wrote schedule.csv, model_error.csv, queue_lengths.csv, decisions.csv in {out}")
    return 0


def cmd_scenario_show(args: argparse.Namespace) -> int:
    name, cfg = _resolve_scenario(args.name)
    print(json.dumps(scenario_to_dict(cfg), indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dualmind",
        description="Slotted-access scheduling testbed: rollout planner, baselines, digital twin.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one policy on one scenario")
    run_p.add_argument("--scenario", default="default", help="builtin name or scenario JSON file")
    run_p.add_argument("--policy", default="dmwm", choices=POLICY_NAMES)
    run_p.add_argument("--runs", type=int, default=30)
    run_p.add_argument("--steps", type=int, default=None, help="override slots per run")
    run_p.add_argument("--seed", type=int, default=42)
    run_p.add_argument("--horizon", type=int, default=None, help="override planning horizon")
    run_p.add_argument(
        "--rollout-reward",
        choices=[mode.value for mode in RolloutReward],
        default=None,
        help="override the rollout scoring rule",
    )
    run_p.add_argument("--out", default=_default_out(), help=f"output dir (or ${OUT_DIR_ENV})")
    run_p.add_argument(
        "--independent-traffic",
        action="store_true",
        help="salt traffic seeds per policy instead of pairing them",
    )
    run_p.add_argument("--workers", type=int, default=1)
    run_p.set_defaults(func=cmd_run)

    camp_p = sub.add_parser("campaign", help="run every builtin scenario against every policy")
    camp_p.add_argument("--out", default=_default_out(), help=f"output dir (or ${OUT_DIR_ENV})")
    camp_p.add_argument("--seed", type=int, default=42)
    camp_p.add_argument("--runs", type=int, default=30)
    camp_p.add_argument("--steps", type=int, default=None)
    camp_p.add_argument("--independent-traffic", action="store_true")
    camp_p.add_argument("--workers", type=int, default=1)
    camp_p.set_defaults(func=cmd_campaign)

    trace_p = sub.add_parser("trace", help="export one dmwm run's schedule and model-error data")
    trace_p.add_argument("--scenario", default="default")
    trace_p.add_argument("--seed", type=int, default=42)
    trace_p.add_argument("--run-index", type=int, default=0)
    trace_p.add_argument("--out", default=_default_out(), help=f"output dir (or ${OUT_DIR_ENV})")
    trace_p.set_defaults(func=cmd_trace)

    scen_p = sub.add_parser("scenario", help="scenario management")
    scen_sub = scen_p.add_subparsers(dest="action", required=True)
    show_p = scen_sub.add_parser("show", help="print the resolved scenario config as JSON")
    show_p.add_argument("name")
    show_p.set_defaults(func=cmd_scenario_show)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UnknownScenario, InvalidConfig) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
