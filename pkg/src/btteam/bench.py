"""Experiment orchestration: grids of (method, robots, alpha, fp) cells.

Every trial is fully determined by (config, cell, trial index): instance
seeds derive from a stable hash that excludes fp/method/macros, so paired
comparisons across those axes run on identical instances. Wall-clock
planning times go to a separate timing file; result artifacts are
byte-reproducible.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

from .macros import register_macros
from .planner import PlanningTimeout, bt_expansion_baseline, mrbtp
from .scenarios import ScenarioParams, generate, witness_sequences
from .sim import MODE_NONE, ExecConfig, run_episode

MRBTP = "mrbtp"
BASELINE = "baseline"


@dataclass(frozen=True)
class ExperimentConfig:
    domain: str = "warehouse"
    robots: tuple[int, ...] = (4,)
    alphas: tuple[float, ...] = (0.0, 0.5, 1.0)
    fps: tuple[float, ...] = (0.0,)
    methods: tuple[str, ...] = (MRBTP,)
    macro_options: tuple[bool, ...] = (False,)
    is_mode: str = "atomic"
    trials: int = 500
    budget_seconds: float = 60.0
    step_budget: int = 300
    seed: int = 0
    successful_only: bool = True
    scenario: dict = field(default_factory=dict)

    @staticmethod
    def from_json(text: str) -> "ExperimentConfig":
        data = json.loads(text)
        lists = {
            "robots": tuple(data.pop("robots", (4,))),
            "alphas": tuple(data.pop("alphas", (0.0, 0.5, 1.0))),
            "fps": tuple(data.pop("fps", (0.0,))),
            "methods": tuple(data.pop("methods", (MRBTP,))),
            "macro_options": tuple(bool(m) for m in data.pop("macro_options", (False,))),
        }
        return ExperimentConfig(**lists, **data)


@dataclass(frozen=True)
class Cell:
    method: str
    n: int
    alpha: float
    fp: float
    macros: bool

    def key(self) -> str:
        return f"{self.method}-n{self.n}-a{self.alpha:g}-fp{self.fp:g}-m{int(self.macros)}"


@dataclass
class TrialRow:
    cell: Cell
    trial: int
    seed: int
    planned: bool
    timeout: bool
    outcome: str
    success: bool
    ts: Optional[int]
    rs: Optional[int]
    comm: Optional[int]
    ec: int
    pt: float


@dataclass(frozen=True)
class MetricsRecord:
    trials: int
    sr: float
    ts_mean: Optional[float]
    rs_mean: Optional[float]
    comm_mean: Optional[float]
    ec_mean: float
    pt_mean: float
    timeouts: int


class EmptyInputError(ValueError):
    pass


def derive_seed(master: int, *parts) -> int:
    text = ":".join([str(master)] + [str(p) for p in parts])
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return int(digest[:16], 16)


def cells_of(cfg: ExperimentConfig) -> list[Cell]:
    return [
        Cell(method=m, n=n, alpha=a, fp=fp, macros=mac)
        for m in cfg.methods
        for n in cfg.robots
        for a in cfg.alphas
        for fp in cfg.fps
        for mac in cfg.macro_options
    ]


def run_trial(cfg: ExperimentConfig, cell: Cell, trial: int) -> TrialRow:
    instance_seed = derive_seed(cfg.seed, cfg.domain, cell.n, cell.alpha, trial)
    params = ScenarioParams(
        domain=cfg.domain,
        robots=cell.n,
        alpha=cell.alpha,
        seed=instance_seed,
        **cfg.scenario,
    )
    instance = generate(params)
    problem = instance.problem
    if cell.macros:
        problem = register_macros(problem, witness_sequences(instance)).problem

    started = time.perf_counter()
    timeout = False
    try:
        if cell.method == BASELINE:
            result = bt_expansion_baseline(problem, cfg.budget_seconds)
        else:
            result = mrbtp(problem, cfg.budget_seconds)
        planned = result.solution is not None
        ec = result.stats.expanded_conditions
    except PlanningTimeout:
        timeout = True
        planned = False
        ec = 0
    pt = time.perf_counter() - started

    if not planned:
        return TrialRow(
            cell=cell,
            trial=trial,
            seed=instance_seed,
            planned=False,
            timeout=timeout,
            outcome="timeout" if timeout else "unsolvable",
            success=False,
            ts=None,
            rs=None,
            comm=None,
            ec=ec,
            pt=pt,
        )

    exec_cfg = ExecConfig(
        failure_prob=cell.fp,
        seed=instance_seed,
        intention_mode=MODE_NONE if cell.method == BASELINE else cfg.is_mode,
        step_budget=cfg.step_budget,
    )
    trace = run_episode(list(result.solution), problem, exec_cfg)
    success = trace.outcome == "success" and trace.goal_reached
    return TrialRow(
        cell=cell,
        trial=trial,
        seed=instance_seed,
        planned=True,
        timeout=False,
        outcome=trace.outcome,
        success=success,
        ts=trace.team_steps,
        rs=trace.robot_steps,
        comm=trace.comm,
        ec=ec,
        pt=pt,
    )


def summarize(rows, successful_only: bool = True) -> MetricsRecord:
    rows = list(rows)
    if not rows:
        raise EmptyInputError("no trial rows to summarize")
    trials = len(rows)
    successes = [r for r in rows if r.success]
    base = successes if successful_only and successes else rows

    def mean(values):
        values = [v for v in values if v is not None]
        return sum(values) / len(values) if values else None

    return MetricsRecord(
        trials=trials,
        sr=100.0 * len(successes) / trials,
        ts_mean=mean([r.ts for r in base]),
        rs_mean=mean([r.rs for r in base]),
        comm_mean=mean([r.comm for r in base]),
        ec_mean=sum(r.ec for r in rows) / trials,
        pt_mean=sum(r.pt for r in rows) / trials,
        timeouts=sum(1 for r in rows if r.timeout),
    )


def paired_success_filter(rows_a, rows_b):
    """Keep only trials where both methods succeeded (fair TS/RS contrast)."""
    ok_a = {r.trial for r in rows_a if r.success}
    ok_b = {r.trial for r in rows_b if r.success}
    both = ok_a & ok_b
    return (
        [r for r in rows_a if r.trial in both],
        [r for r in rows_b if r.trial in both],
    )


_CSV_FIELDS = [
    "method", "n", "alpha", "fp", "macros", "trial", "seed", "planned",
    "timeout", "outcome", "success", "ts", "rs", "comm", "ec",
]


def rows_to_csv(rows) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(_CSV_FIELDS)
    for r in rows:
        writer.writerow(
            [
                r.cell.method, r.cell.n, f"{r.cell.alpha:g}", f"{r.cell.fp:g}",
                int(r.cell.macros), r.trial, r.seed, int(r.planned),
                int(r.timeout), r.outcome, int(r.success),
                "" if r.ts is None else r.ts,
                "" if r.rs is None else r.rs,
                "" if r.comm is None else r.comm,
                r.ec,
            ]
        )
    return out.getvalue()


def run_experiment(cfg: ExperimentConfig, out_dir: Optional[Path] = None):
    """Run every cell; returns {cell: (rows, MetricsRecord)}.

    Writes per-trial rows (results.csv), aggregates (summary.json), and
    wall-clock timings (timing.json, excluded from reproducibility claims).
    """
    results: dict[Cell, tuple[list[TrialRow], MetricsRecord]] = {}
    all_rows: list[TrialRow] = []
    for cell in cells_of(cfg):
        rows = [run_trial(cfg, cell, t) for t in range(cfg.trials)]
        results[cell] = (rows, summarize(rows, cfg.successful_only))
        all_rows.extend(rows)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "results.csv").write_text(rows_to_csv(all_rows))
        summary = {
            cell.key(): {
                k: v for k, v in asdict(record).items() if k != "pt_mean"
            }
            for cell, (_rows, record) in results.items()
        }
        (out_dir / "summary.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n"
        )
        timing = {
            cell.key(): {
                "pt_mean": record.pt_mean,
                "pt": [r.pt for r in rows],
            }
            for cell, (rows, record) in results.items()
        }
        (out_dir / "timing.json").write_text(
            json.dumps(timing, indent=2, sort_keys=True) + "\n"
        )
    return results
