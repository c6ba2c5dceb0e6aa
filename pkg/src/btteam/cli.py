"""Command-line interface: gen, plan, run, advise, bench."""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

from . import advisor as advisor_mod
from . import bt
from .bench import ExperimentConfig, run_experiment
from .domain_io import Domain, load_domain, parse_problem, serialize_problem
from .macros import register_macros
from .planner import PlanningTimeout, bt_expansion_baseline, mrbtp
from .scenarios import ScenarioParams, generate
from .sim import ExecConfig, run_episode


def _load_problem(args):
    domain = None
    if getattr(args, "domain", None):
        domain = load_domain(Path(args.domain).read_text())
    problem = parse_problem(Path(args.problem).read_text(), domain=domain)
    return problem, domain


def _register_from_file(problem, path):
    raw = Path(path).read_text()
    result = advisor_mod.validate_proposal(raw, problem)
    if not result.ok:
        raise SystemExit(
            "macro proposal file rejected:\n" + "\n".join(result.feedback)
        )
    return register_macros(problem, result.proposal.sequences).problem


def cmd_gen(args) -> int:
    params = ScenarioParams(
        domain=args.scenario,
        robots=args.robots,
        alpha=args.alpha,
        seed=args.seed,
    )
    instance = generate(params)
    out = Path(args.out)
    out.write_text(serialize_problem(instance.problem))
    if args.witness:
        witness = [
            {"robot": robot, "action": str(action)}
            for robot, action in instance.witness
        ]
        Path(args.witness).write_text(json.dumps(witness, indent=2) + "\n")
    print(json.dumps({"problem": str(out), "robots": params.robots}))
    return 0


def cmd_plan(args) -> int:
    problem, _domain = _load_problem(args)
    if args.macros:
        problem = _register_from_file(problem, args.macros)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    try:
        if args.baseline:
            result = bt_expansion_baseline(problem, args.budget)
        else:
            result = mrbtp(problem, args.budget)
        outcome = "solution" if result.solution is not None else "unsolvable"
        ec = result.stats.expanded_conditions
    except PlanningTimeout:
        result = None
        outcome = "timeout"
        ec = 0
    pt = time.perf_counter() - started
    if result is not None and result.solution is not None:
        for i, tree in enumerate(result.solution):
            (out_dir / f"bt_robot_{i}.json").write_text(bt.dumps(tree))
    summary = {"outcome": outcome, "ec": ec, "pt": pt}
    (out_dir / "plan_summary.json").write_text(json.dumps(summary) + "\n")
    print(json.dumps(summary))
    return 0


def cmd_run(args) -> int:
    problem, _domain = _load_problem(args)
    bt_dir = Path(args.bt_dir)
    paths = sorted(bt_dir.glob("bt_robot_*.json"))
    if len(paths) != problem.robots:
        raise SystemExit(
            f"expected {problem.robots} trees in {bt_dir}, found {len(paths)}"
        )
    trees = [bt.loads(p.read_text()) for p in paths]
    cfg = ExecConfig(
        failure_prob=args.fp,
        seed=args.seed,
        intention_mode=args.is_mode,
        step_budget=args.budget,
    )
    trace = run_episode(trees, problem, cfg)
    metrics = {
        "outcome": trace.outcome,
        "goal_reached": trace.goal_reached,
        "success_step": trace.success_step,
        "ts": trace.team_steps,
        "rs": trace.robot_steps,
        "comm": trace.comm,
    }
    if args.trace:
        with open(args.trace, "w") as fh:
            for record in trace.steps:
                fh.write(json.dumps(asdict(record)) + "\n")
    print(json.dumps(metrics))
    return 0


def cmd_advise(args) -> int:
    problem, domain = _load_problem(args)
    if args.provider == "scripted":
        replies = json.loads(Path(args.replies).read_text())
        provider = advisor_mod.ScriptedProvider(replies)
    elif args.provider == "fixed":
        provider = advisor_mod.FixedReplyProvider(Path(args.replies).read_text())
    else:
        config = json.loads(Path(args.config).read_text()) if args.config else {}
        provider = advisor_mod.RemoteProvider(
            endpoint=config.get("endpoint", ""),
            model=config.get("model", ""),
            token_env=config.get("token_env", "BTTEAM_ADVISOR_TOKEN"),
        )
    few_shot = Path(args.few_shot).read_text() if args.few_shot else ""
    result = advisor_mod.advise(
        provider, problem, few_shot=few_shot, domain=domain, max_rounds=args.max_rounds
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "transcript.json").write_text(result.transcript_json())
    if result.proposal is not None:
        (out_dir / "proposal.json").write_text(result.proposal.to_json())
    print(json.dumps({"accepted": result.proposal is not None, "rounds": len(result.rounds)}))
    return 0


def cmd_bench(args) -> int:
    cfg = ExperimentConfig.from_json(Path(args.config).read_text())
    if args.seed is not None:
        cfg = ExperimentConfig.from_json(
            json.dumps({**json.loads(Path(args.config).read_text()), "seed": args.seed})
        )
    results = run_experiment(cfg, out_dir=Path(args.out))
    for cell, (_rows, record) in results.items():
        print(json.dumps({"cell": cell.key(), "sr": record.sr, "trials": record.trials}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="btteam",
        description="Multi-robot behavior-tree planning and execution toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random solvable instance")
    p.add_argument("--scenario", choices=["warehouse", "home"], default="warehouse")
    p.add_argument("--robots", type=int, default=4)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--witness", default=None, help="also write the witness plan")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("plan", help="plan one BT per robot")
    p.add_argument("--problem", required=True)
    p.add_argument("--domain", default=None)
    p.add_argument("--out", required=True, help="output directory for BT files")
    p.add_argument("--budget", type=float, default=60.0)
    p.add_argument("--baseline", action="store_true")
    p.add_argument("--macros", default=None, help="macro proposal file to register")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("run", help="execute planned BTs in the simulator")
    p.add_argument("--problem", required=True)
    p.add_argument("--domain", default=None)
    p.add_argument("--bt-dir", required=True)
    p.add_argument("--fp", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--is-mode", choices=["none", "atomic", "subtree", "both"],
                   default="atomic")
    p.add_argument("--budget", type=int, default=300)
    p.add_argument("--trace", default=None, help="write JSON-lines step trace")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("advise", help="request macro proposals from a provider")
    p.add_argument("--problem", required=True)
    p.add_argument("--domain", default=None)
    p.add_argument("--provider", choices=["scripted", "fixed", "remote"],
                   default="scripted")
    p.add_argument("--replies", default=None, help="replies file for offline providers")
    p.add_argument("--config", default=None, help="remote provider config JSON")
    p.add_argument("--few-shot", default=None)
    p.add_argument("--max-rounds", type=int, default=3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_advise)

    p = sub.add_parser("bench", help="run an experiment grid")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
