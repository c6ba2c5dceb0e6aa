"""Deterministic multi-robot BT execution with intention sharing.

One logical team clock; each step runs a fixed phase order: tick robots to
quiescence (broadcast-driven re-ticks included), evaluate blocking, advance
and complete actions, then bookkeeping. All randomness comes from one
per-episode seeded generator, so identical inputs replay identical traces.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from . import bt
from .bt import (
    ACTION,
    ENTER,
    EXIT,
    CompiledTree,
    Decision,
    MaskContext,
    Status,
    tree_literals,
)
from .world import MACRO, ActionModel, LiteralSpace, Problem, apply_action

MODE_NONE = "none"
MODE_ATOMIC = "atomic"
MODE_SUBTREE = "subtree"
MODE_BOTH = "both"

_BOOKKEEPING_CAP = 64


class InconsistentQueueError(RuntimeError):
    """The simulator tried to remove an intention that is not queued."""


@dataclass(frozen=True)
class ExecConfig:
    failure_prob: float = 0.0
    seed: int = 0
    intention_mode: str = MODE_ATOMIC
    step_budget: int = 300
    rs_counts_blocked: bool = False

    def __post_init__(self):
        if not 0.0 <= self.failure_prob <= 1.0:
            raise ValueError("failure_prob outside [0, 1]")
        if self.intention_mode not in (MODE_NONE, MODE_ATOMIC, MODE_SUBTREE, MODE_BOTH):
            raise ValueError(f"unknown intention mode {self.intention_mode!r}")


@dataclass(frozen=True)
class IntentionEntry:
    robot: int
    action: ActionModel
    layer: str
    entry_step: int


def belief_spaces(queue, robot: int) -> tuple[frozenset, frozenset]:
    """Belief success/failure literal sets for one robot.

    Entries earlier than the robot's own first entry contribute; a robot with
    no entry is treated as sitting just past the tail. Conflicting effects
    between earlier intentions resolve in queue order (later intention wins),
    which keeps the two sets disjoint.
    """
    j = len(queue)
    for idx, entry in enumerate(queue):
        if entry.robot == robot:
            j = idx
            break
    bs: set = set()
    bf: set = set()
    for entry in queue[:j]:
        eff_add = entry.action.add - entry.action.delete
        eff_del = entry.action.delete - entry.action.add
        bs -= eff_del
        bs |= eff_add
        bf -= eff_add
        bf |= eff_del
    return frozenset(bs), frozenset(bf)


def broadcast_update(
    queue,
    robot: int,
    old: Optional[ActionModel] = None,
    new: Optional[ActionModel] = None,
    entry_step: int = 0,
) -> tuple[IntentionEntry, ...]:
    """Remove the robot's old intention (if any), append the new at the tail."""
    queue = tuple(queue)
    if old is not None:
        match = [e for e in queue if e.robot == robot and e.action == old]
        if not match:
            raise InconsistentQueueError(f"robot {robot} has no queued {old}")
        queue = tuple(e for e in queue if e is not match[0])
    if new is not None:
        layer = MACRO if new.kind == MACRO else "atomic"
        queue = queue + (IntentionEntry(robot, new, layer, entry_step),)
    return queue


@dataclass
class _Active:
    action: ActionModel
    started: int
    progress: int = 0
    blocked: bool = False


@dataclass(frozen=True)
class CompletionEvent:
    robot: int
    action: str
    applied: bool
    failed: bool
    reason: str = ""


@dataclass(frozen=True)
class StepRecord:
    step: int
    state: tuple[str, ...]
    statuses: tuple[str, ...]
    decisions: tuple[Optional[str], ...]
    blocked: tuple[bool, ...]
    broadcasts: int
    completions: tuple[CompletionEvent, ...]
    serialized: bool


@dataclass
class EpisodeTrace:
    outcome: str = "budget"
    success_step: Optional[int] = None
    team_steps: int = 0
    robot_steps: int = 0
    comm: int = 0
    goal_reached: bool = False
    steps: list[StepRecord] = field(default_factory=list)

    def duplicate_completions(self) -> int:
        """Completion events beyond the first per distinct action."""
        seen: dict[str, int] = {}
        for record in self.steps:
            for event in record.completions:
                seen[event.action] = seen.get(event.action, 0) + 1
        return sum(c - 1 for c in seen.values() if c > 1)

    def started_actions(self) -> list[tuple[int, int, str]]:
        out = []
        previous: dict[int, Optional[str]] = {}
        for record in self.steps:
            for robot, decision in enumerate(record.decisions):
                if decision is not None and previous.get(robot) != decision:
                    out.append((record.step, robot, decision))
                previous[robot] = decision
        return out


class TeamExecution:
    """Mutable execution engine; one instance per episode."""

    def __init__(self, trees, problem: Problem, cfg: ExecConfig):
        self.problem = problem
        self.cfg = cfg
        self.n = problem.robots
        literals = set(problem.all_literals())
        for tree in trees:
            literals |= tree_literals(tree)
        self.space = LiteralSpace(literals)
        self.trees = [CompiledTree(t, self.space) for t in trees]
        self.state_mask = self.space.mask(problem.init)
        self.queue: tuple[IntentionEntry, ...] = ()
        self.running: list[Optional[_Active]] = [None] * self.n
        self.failed: list[set] = [set() for _ in range(self.n)]
        self.running_subtrees: list[set] = [set() for _ in range(self.n)]
        self.statuses: list[Status] = [Status.RUNNING] * self.n
        self.clock = 0
        self.comm = 0
        self.robot_steps = 0
        self.rng = random.Random(cfg.seed)
        self.serialized_until_change = False
        self._stall_signature = None
        self._stall_count = 0

    # -- intention plumbing

    def _layer_broadcast(self, action: ActionModel) -> bool:
        mode = self.cfg.intention_mode
        if mode == MODE_NONE:
            return False
        if mode == MODE_BOTH:
            return True
        layer = MACRO if action.kind == MACRO else "atomic"
        return (mode == MODE_SUBTREE) == (layer == MACRO)

    def _switch(self, robot: int, new: Optional[ActionModel]) -> None:
        active = self.running[robot]
        old = active.action if active else None
        old_b = old is not None and self._layer_broadcast(old)
        new_b = new is not None and self._layer_broadcast(new)
        if old_b or new_b:
            self.queue = broadcast_update(
                self.queue,
                robot,
                old if old_b else None,
                new if new_b else None,
                entry_step=self.clock,
            )
            self.comm += int(old_b) + int(new_b)
            self._step_broadcasts += int(old_b) + int(new_b)
        self.running[robot] = _Active(new, self.clock) if new is not None else None

    # -- ticking

    def _beliefs(self, robot: int) -> tuple[int, int]:
        if self.cfg.intention_mode == MODE_NONE:
            return 0, 0
        bs, bf = belief_spaces(self.queue, robot)
        return self.space.mask_known(bs), self.space.mask_known(bf)

    def _tick_robot(self, robot: int) -> tuple[Status, Optional[Decision]]:
        bs, bf = self._beliefs(robot)
        for _ in range(_BOOKKEEPING_CAP):
            ctx = MaskContext(
                state=self.state_mask,
                belief_success=bs,
                belief_failure=bf,
                running_subtrees=frozenset(self.running_subtrees[robot]),
                failed_actions=frozenset(self.failed[robot]),
            )
            status, decision = self.trees[robot].tick(ctx)
            if decision is not None and decision.kind == ENTER:
                if decision.subtree_id in self.running_subtrees[robot]:
                    break
                self.running_subtrees[robot].add(decision.subtree_id)
                continue
            if decision is not None and decision.kind == EXIT:
                if decision.subtree_id in self.running_subtrees[robot]:
                    self.running_subtrees[robot].discard(decision.subtree_id)
                if status is Status.SUCCESS:
                    return status, None
                continue
            # Abandoning a subtree mid-run clears its running mark.
            if decision is not None and self.running_subtrees[robot]:
                self.running_subtrees[robot] &= set(decision.scope)
            elif decision is None:
                self.running_subtrees[robot].clear()
            return status, decision
        return status, decision

    # -- stepping

    def step(self) -> StepRecord:
        step = self.clock
        self._step_broadcasts = 0
        active = [
            i for i in range(self.n) if step % self.problem.robot_periods[i] == 0
        ]
        decisions: list[Optional[str]] = [
            str(self.running[i].action) if self.running[i] else None
            for i in range(self.n)
        ]

        # Phase A: tick active robots in priority order; broadcasts re-tick
        # the others until no robot changes its intention.
        cap = self.n * self.n + self.n
        ticks = 0
        serialized_step = False
        changed = True
        while changed:
            changed = False
            for robot in active:
                status, decision = self._tick_robot(robot)
                ticks += 1
                self.statuses[robot] = status
                desired = (
                    decision.action
                    if decision is not None and decision.kind == ACTION
                    else None
                )
                current = (
                    self.running[robot].action if self.running[robot] else None
                )
                if desired != current:
                    self._switch(robot, desired)
                    decisions[robot] = str(desired) if desired else None
                    changed = True
                else:
                    decisions[robot] = str(desired) if desired else None
            if ticks > cap:
                serialized_step = True
                break

        if serialized_step:
            # Live-lock guard: only the highest-priority robot keeps a
            # decision made this step, everyone else stands down.
            keeper = next(
                (
                    i
                    for i in range(self.n)
                    if self.running[i] and self.running[i].started == step
                ),
                None,
            )
            for robot in range(self.n):
                act = self.running[robot]
                if act and act.started == step and robot != keeper:
                    self._switch(robot, None)
                    decisions[robot] = None

        if self.serialized_until_change:
            serialized_step = True
            keeper = next((i for i in range(self.n) if self.running[i]), None)
            for robot in range(self.n):
                if robot != keeper and self.running[robot]:
                    self._switch(robot, None)
                    decisions[robot] = None

        # Phase B: blocking. An action whose precondition is only believed
        # true holds running without progressing.
        blocked_flags = [False] * self.n
        for robot in range(self.n):
            act = self.running[robot]
            if act is None:
                continue
            bs, _bf = self._beliefs(robot)
            pre_mask = self.space.mask_known(act.action.pre)
            act.blocked = bool(pre_mask & bs & ~self.state_mask)
            blocked_flags[robot] = act.blocked

        # Phase C: progress and completions, priority order; effects apply
        # sequentially and never under a violated real precondition.
        completions: list[CompletionEvent] = []
        state = frozenset(self.space.literals(self.state_mask))
        for robot in range(self.n):
            act = self.running[robot]
            if act is None or act.blocked:
                continue
            act.progress += 1
            self.robot_steps += 1
            if act.progress < act.action.duration:
                continue
            action = act.action
            if not action.pre <= state:
                completions.append(
                    CompletionEvent(robot, str(action), False, False, "precondition")
                )
            elif self.cfg.failure_prob > 0 and self.rng.random() < self.cfg.failure_prob:
                self.failed[robot].add(action)
                completions.append(
                    CompletionEvent(robot, str(action), False, True, "failure")
                )
            else:
                state = apply_action(state, action)
                completions.append(CompletionEvent(robot, str(action), True, False))
            self._switch(robot, None)
        if self.cfg.rs_counts_blocked:
            self.robot_steps += sum(
                1 for i in range(self.n) if self.running[i] and self.running[i].blocked
            )
        new_mask = self.space.mask(state)

        # Phase D: stall detection drives the serialized fallback.
        signature = (
            new_mask,
            tuple((e.robot, str(e.action)) for e in self.queue),
            tuple(
                (i, self.running[i].progress if self.running[i] else -1)
                for i in range(self.n)
            ),
        )
        if new_mask != self.state_mask:
            self.serialized_until_change = False
            self._stall_count = 0
            self._stall_signature = None
        elif signature == self._stall_signature:
            self._stall_count += 1
            if self._stall_count >= self.n + 1:
                self.serialized_until_change = True
        else:
            self._stall_signature = signature
            self._stall_count = 0

        self.state_mask = new_mask
        self.clock += 1
        return StepRecord(
            step=step,
            state=tuple(str(l) for l in sorted(state)),
            statuses=tuple(s.value for s in self.statuses),
            decisions=tuple(decisions),
            blocked=tuple(blocked_flags),
            broadcasts=self._step_broadcasts,
            completions=tuple(completions),
            serialized=serialized_step or self.serialized_until_change,
        )

    def team_status(self) -> Status:
        if any(s is Status.RUNNING for s in self.statuses):
            return Status.RUNNING
        if any(s is Status.SUCCESS for s in self.statuses):
            return Status.SUCCESS
        return Status.FAILURE


def team_status_of(statuses) -> Status:
    """Three-case team status over per-robot statuses."""
    statuses = list(statuses)
    if any(s is Status.RUNNING for s in statuses):
        return Status.RUNNING
    if any(s is Status.SUCCESS for s in statuses):
        return Status.SUCCESS
    return Status.FAILURE


def run_episode(trees, problem: Problem, cfg: ExecConfig) -> EpisodeTrace:
    """Execute a tree set until team success, team failure, or budget."""
    engine = TeamExecution(trees, problem, cfg)
    trace = EpisodeTrace()
    goal = problem.goal
    for _ in range(cfg.step_budget):
        record = engine.step()
        trace.steps.append(record)
        status = engine.team_status()
        if status is Status.SUCCESS:
            state = frozenset(engine.space.literals(engine.state_mask))
            trace.outcome = "success"
            trace.success_step = record.step
            trace.goal_reached = goal <= state
            break
        if status is Status.FAILURE:
            trace.outcome = "failure"
            break
    trace.team_steps = (
        trace.success_step if trace.success_step is not None else len(trace.steps)
    )
    trace.robot_steps = engine.robot_steps
    trace.comm = engine.comm
    return trace
