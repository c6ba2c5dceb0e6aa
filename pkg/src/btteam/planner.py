"""Backward-chaining BT planning: per-robot cross-tree expansion and baseline.

The public operations (premise_check, expand_one_robot, has_subset) work on
plain trees and literal sets. The main planner runs the same expansion rules
over an interned bitmask representation and materializes trees at the end;
an equivalence test keeps the two routes honest.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from . import bt
from .bt import ActionLeaf, BTNode, Fallback, Sequence, condition_to_subtree
from .world import ActionModel, LiteralSpace, Problem, sort_literals


class PlanningTimeout(Exception):
    def __init__(self, budget_seconds: float):
        self.budget_seconds = budget_seconds
        super().__init__(f"planning budget of {budget_seconds}s exceeded")


@dataclass(frozen=True)
class PlanStats:
    expanded_conditions: int
    planning_seconds: float


@dataclass(frozen=True)
class PlanResult:
    """Either a solution tree set or an unsolvable verdict, plus stats."""

    solution: Optional[tuple[BTNode, ...]]
    stats: PlanStats
    # Baseline only: which robots' independent expansions reached the start.
    covered_start: tuple[bool, ...] = ()

    @property
    def solvable(self) -> bool:
        return self.solution is not None


def premise_check(condition, action: ActionModel) -> bool:
    """True iff the action can be the last step toward the condition.

    The action must contribute or preserve something the condition needs and
    must not delete any of its literals.
    """
    c = frozenset(condition)
    if c & action.delete:
        return False
    return bool(c & (action.pre | action.add))


def regress(condition, action: ActionModel) -> frozenset:
    """Condition that must hold before `action` so `condition` holds after."""
    return action.pre | (frozenset(condition) - action.add)


def has_subset(condition, pool) -> bool:
    """True iff some member of pool is a subset of condition."""
    c = frozenset(condition)
    return any(p <= c for p in pool)


def ordered_actions(actions) -> list[ActionModel]:
    """Deterministic expansion order: macros first, then interned order."""
    return sorted(actions, key=lambda a: a.sort_key)


def tagged_conditions(tree: BTNode) -> set:
    """Conditions of every planner-tagged guard present in the tree."""
    return {
        node.condition
        for node in bt.iter_nodes(tree)
        if isinstance(node, Sequence) and node.condition is not None
    }


def _guard(condition, tagged: bool) -> Sequence:
    guard = condition_to_subtree(condition)
    if tagged:
        return guard
    return Sequence(children=guard.children, condition=None)


def expand_one_robot(tree: BTNode, actions, condition):
    """One-step expansion of one robot's tree toward `condition`.

    Every premise action contributes a Sequence(guard, action) branch to a
    new fallback. If the condition is already a guard in the tree the guard
    is replaced in place; otherwise the new fallback is appended at the tail
    of the root fallback. Returns the (possibly new) tree and the list of
    newly generated guard conditions.

    Only the first guard for a condition carries the planner tag; repeats
    elsewhere in the tree stay untagged so replace_condition always has a
    unique target.
    """
    cond = frozenset(condition)
    existing = tagged_conditions(tree)
    branches = []
    new_conditions = []
    for action in ordered_actions(actions):
        if not premise_check(cond, action):
            continue
        c_a = regress(cond, action)
        fresh = c_a != cond and c_a not in existing and c_a not in new_conditions
        branches.append(
            Sequence(children=(_guard(c_a, fresh), ActionLeaf(action)))
        )
        if c_a not in new_conditions:
            new_conditions.append(c_a)
    if not branches:
        return tree, []
    expanded = Fallback((condition_to_subtree(cond), *branches))
    try:
        tree = bt.replace_condition(tree, cond, expanded)
    except bt.ConditionNotFoundError:
        if isinstance(tree, Fallback):
            tree = Fallback(tree.children + (expanded,))
        else:
            tree = Fallback((tree, expanded))
    return tree, new_conditions


# ---------------------------------------------------------------------------
# Mask engine


class _Node:
    __slots__ = ("mask", "entries")

    def __init__(self, mask: int):
        self.mask = mask
        # None until expanded; then a list of (guard_mask, action, owns) in
        # deterministic action order.
        self.entries = None


class _RobotTree:
    __slots__ = ("nodes", "roots")

    def __init__(self, goal_mask: int):
        self.nodes = {goal_mask: _Node(goal_mask)}
        self.roots = [goal_mask]

    def expand(self, cond_mask: int, expansions) -> None:
        node = self.nodes.get(cond_mask)
        if node is None:
            node = _Node(cond_mask)
            self.nodes[cond_mask] = node
            self.roots.append(cond_mask)
        entries = []
        for guard_mask, action in expansions:
            owns = guard_mask not in self.nodes
            if owns:
                self.nodes[guard_mask] = _Node(guard_mask)
            entries.append((guard_mask, action, owns))
        node.entries = entries


class _Engine:
    def __init__(self, problem: Problem, budget_seconds: float):
        self.problem = problem
        self.space = LiteralSpace.for_problem(problem)
        self.budget = budget_seconds
        self.deadline = time.perf_counter() + budget_seconds
        self.s0 = self.space.mask(problem.init)
        self.goal = self.space.mask(problem.goal)
        self.compiled = []
        for space_actions in problem.action_spaces:
            compiled = []
            for a in ordered_actions(space_actions):
                compiled.append(
                    (
                        a,
                        self.space.mask(a.pre),
                        self.space.mask(a.add),
                        self.space.mask(a.delete),
                    )
                )
            self.compiled.append(compiled)
        self.expanded_count = 0

    def check_budget(self):
        if time.perf_counter() > self.deadline:
            raise PlanningTimeout(self.budget)

    def expansions_for(self, robot: int, c: int):
        out = []
        for action, pre_m, add_m, del_m in self.compiled[robot]:
            if c & del_m:
                continue
            if not (c & (pre_m | add_m)):
                continue
            out.append((pre_m | (c & ~add_m), action))
        return out

    def materialize(self, trees: list[_RobotTree]) -> tuple[BTNode, ...]:
        return tuple(self._materialize_robot(t) for t in trees)

    def _materialize_robot(self, rt: _RobotTree) -> BTNode:
        built: dict[int, BTNode] = {}
        # Post-order over owned children so nested expansions resolve first.
        for root in rt.roots:
            self._build(rt, root, built)
        children = [built[m] for m in rt.roots]
        return Fallback(tuple(children))

    def _build(self, rt: _RobotTree, mask: int, built: dict) -> None:
        stack = [(mask, False)]
        while stack:
            m, ready = stack.pop()
            if m in built:
                continue
            node = rt.nodes[m]
            if not ready:
                stack.append((m, True))
                if node.entries:
                    for guard_mask, _a, owns in node.entries:
                        if owns and rt.nodes[guard_mask].entries:
                            stack.append((guard_mask, False))
                continue
            guard = condition_to_subtree(frozenset(self.space.literals(m)))
            if not node.entries:
                built[m] = guard
                continue
            branches = []
            for guard_mask, action, owns in node.entries:
                if owns and rt.nodes[guard_mask].entries:
                    child = built[guard_mask]
                else:
                    child = condition_to_subtree(
                        frozenset(self.space.literals(guard_mask))
                    )
                    if not owns:
                        # Duplicate guard: the canonical (replaceable) node
                        # for this condition lives elsewhere in the tree.
                        child = Sequence(children=child.children, condition=None)
                branches.append(Sequence(children=(child, ActionLeaf(action))))
            built[m] = Fallback((guard, *branches))


def mrbtp(problem: Problem, budget_seconds: float = 60.0) -> PlanResult:
    """Plan one BT per robot via cross-tree expansion.

    Conditions pop FIFO; a popped condition is pruned when a previously
    expanded condition is a subset of it. (The pseudocode folds generated and
    expanded conditions into one set, which read literally would prune every
    pop against itself; splitting dedup-at-insert from prune-at-pop keeps the
    completeness argument intact.) After each robot's expansion the new
    conditions are checked against the start state and a solution returned
    immediately on a hit, so trees may keep unexpanded guards right of the
    satisfied branch.
    """
    start = time.perf_counter()
    eng = _Engine(problem, budget_seconds)
    n = problem.robots
    trees = [_RobotTree(eng.goal) for _ in range(n)]

    def result(solution):
        return PlanResult(
            solution=solution,
            stats=PlanStats(eng.expanded_count, time.perf_counter() - start),
        )

    # The printed loop never tests the goal against the start state; an
    # initially satisfied (or empty) goal is solved by the bare goal guard.
    if eng.goal & ~eng.s0 == 0:
        return result(eng.materialize(trees))

    queue = deque([eng.goal])
    generated = {eng.goal}
    explored: list[int] = []
    while queue:
        eng.check_budget()
        c = queue.popleft()
        if any(e & ~c == 0 for e in explored):
            continue
        explored.append(c)
        eng.expanded_count += 1
        for robot in range(n):
            expansions = eng.expansions_for(robot, c)
            if not expansions:
                continue
            trees[robot].expand(c, expansions)
            hit = any(g & ~eng.s0 == 0 for g, _a in expansions)
            if hit:
                return result(eng.materialize(trees))
            for guard_mask, _a in expansions:
                if guard_mask not in generated:
                    generated.add(guard_mask)
                    queue.append(guard_mask)
    return result(None)


def bt_expansion_baseline(problem: Problem, budget_seconds: float = 60.0) -> PlanResult:
    """Single-robot backward expansion run independently per robot.

    No cross-tree expansion: each robot regresses the team goal using only
    its own actions, so its tree may cover only part of the state space.
    Always returns one tree per robot.
    """
    start = time.perf_counter()
    eng = _Engine(problem, budget_seconds)
    n = problem.robots
    trees = [_RobotTree(eng.goal) for _ in range(n)]
    covered = [False] * n

    if eng.goal & ~eng.s0 == 0:
        covered = [True] * n
    else:
        for robot in range(n):
            queue = deque([eng.goal])
            generated = {eng.goal}
            explored: list[int] = []
            while queue:
                eng.check_budget()
                c = queue.popleft()
                if any(e & ~c == 0 for e in explored):
                    continue
                explored.append(c)
                eng.expanded_count += 1
                expansions = eng.expansions_for(robot, c)
                if not expansions:
                    continue
                trees[robot].expand(c, expansions)
                if any(g & ~eng.s0 == 0 for g, _a in expansions):
                    covered[robot] = True
                    break
                for guard_mask, _a in expansions:
                    if guard_mask not in generated:
                        generated.add(guard_mask)
                        queue.append(guard_mask)

    return PlanResult(
        solution=eng.materialize(trees),
        stats=PlanStats(eng.expanded_count, time.perf_counter() - start),
        covered_start=tuple(covered),
    )
