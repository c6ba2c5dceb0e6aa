"""Composing action sequences into long-horizon macro actions.

A coherent sequence folds into a single action model (computed by forward
symbolic simulation), an internal backward-chained execution tree, and a
control wrapper that keeps the chain alive when its entry precondition
breaks mid-run.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import bt
from .bt import (
    ActionLeaf,
    BTNode,
    EnterSubtree,
    ExitSubtree,
    Fallback,
    RunningSubtree,
    Sequence,
    condition_to_subtree,
)
from .planner import ordered_actions, premise_check, regress
from .world import MACRO, ActionModel, Literal, Problem, sort_literals


@dataclass(frozen=True)
class CoherenceFailure:
    """Why a sequence cannot be pre-planned: the offending index and what
    the action at that index was missing."""

    index: int
    missing: frozenset
    reason: str

    def describe(self, sequence) -> str:
        action = sequence[self.index]
        missing = ", ".join(str(l) for l in sort_literals(self.missing))
        return f"{action} at position {self.index + 1}: {self.reason} ({missing})"


class IncoherentSequenceError(ValueError):
    def __init__(self, sequence, failure: CoherenceFailure):
        self.sequence = tuple(sequence)
        self.failure = failure
        super().__init__(failure.describe(self.sequence))


@dataclass(frozen=True)
class MacroAction:
    """A composed sequence: its model, execution body, and identity."""

    macro_id: str
    sequence: tuple[ActionModel, ...]
    model: ActionModel
    body: BTNode

    @property
    def duration(self) -> int:
        return self.model.duration


def default_macro_id(sequence) -> str:
    """Identifier from the add effects of the last action in the sequence."""
    last = sequence[-1]
    return "&".join(str(l) for l in sort_literals(last.add))


def _forward_fold(sequence):
    """Walk the sequence from an abstract start.

    Tracks which literals are assumed from the start (the composed
    precondition), which are currently guaranteed, and which are known
    deleted. Returns (pre, last_touch) or a CoherenceFailure.
    """
    assumed: set[Literal] = set()
    true_now: set[Literal] = set()
    false_now: set[Literal] = set()
    last_touch: dict[Literal, str] = {}
    for j, action in enumerate(sequence):
        blocked = (action.pre - true_now) & false_now
        if blocked:
            return None, CoherenceFailure(
                index=j,
                missing=frozenset(blocked),
                reason="precondition deleted by an earlier action",
            )
        need = action.pre - true_now
        assumed |= need
        true_now |= need
        true_now |= action.add
        true_now -= action.delete
        false_now |= action.delete
        false_now -= action.add
        for l in action.add:
            last_touch[l] = "add"
        for l in action.delete:
            last_touch[l] = "del"
    return (frozenset(assumed), last_touch), None


def _backward_chain(sequence, goal):
    """Regress the macro goal through the sequence, newest action first.

    Returns the guard for each position (index-aligned with the sequence) or
    a CoherenceFailure when some action cannot expand the chained condition.
    """
    guards: list[frozenset] = [frozenset()] * len(sequence)
    cond = frozenset(goal)
    for j in range(len(sequence) - 1, -1, -1):
        action = sequence[j]
        if not premise_check(cond, action):
            return None, CoherenceFailure(
                index=j,
                missing=frozenset(cond),
                reason="action cannot expand the chained condition",
            )
        cond = regress(cond, action)
        guards[j] = cond
    return guards, None


def _composed_model(sequence, macro_id):
    folded, failure = _forward_fold(sequence)
    if failure is not None:
        return None, failure
    pre, last_touch = folded
    net_add = frozenset(l for l, t in last_touch.items() if t == "add")
    net_del = frozenset(l for l, t in last_touch.items() if t == "del")
    model = ActionModel(
        name=macro_id,
        args=(),
        pre=pre,
        add=net_add - pre,
        delete=net_del,
        duration=sum(a.duration for a in sequence),
        kind=MACRO,
    )
    return model, None


def check_coherence(sequence) -> Optional[CoherenceFailure]:
    """None when the sequence can be pre-planned, else the first failure."""
    sequence = tuple(sequence)
    if not sequence:
        return CoherenceFailure(0, frozenset(), "empty sequence")
    model, failure = _composed_model(sequence, "probe")
    if failure is not None:
        return failure
    goal = model.add | (model.pre - model.delete)
    _guards, failure = _backward_chain(sequence, goal)
    return failure


def compose_macro(sequence, macro_id: str | None = None) -> ActionModel:
    """Fold a coherent sequence into one long-horizon action model."""
    sequence = tuple(sequence)
    failure = check_coherence(sequence)
    if failure is not None:
        raise IncoherentSequenceError(sequence, failure)
    model, _ = _composed_model(sequence, macro_id or default_macro_id(sequence))
    return model


def preplan_subtree(sequence, macro_id: str | None = None) -> BTNode:
    """Build the wrapped execution tree for a coherent sequence.

    The inner chain is the goal condition plus one guarded branch per action,
    later stages leftmost, so execution walks the sequence left to right. The
    wrapper gate admits entry when the composed precondition holds and keeps
    the chain ticking afterwards even if that precondition breaks mid-run.
    """
    sequence = tuple(sequence)
    failure = check_coherence(sequence)
    if failure is not None:
        raise IncoherentSequenceError(sequence, failure)
    sid = macro_id or default_macro_id(sequence)
    model, _ = _composed_model(sequence, sid)
    goal = model.add | (model.pre - model.delete)
    guards, _ = _backward_chain(sequence, goal)
    branches = [
        Sequence(children=(condition_to_subtree(guards[j]), ActionLeaf(sequence[j])))
        for j in range(len(sequence) - 1, -1, -1)
    ]
    inner = Fallback((condition_to_subtree(goal), *branches))
    gate = Fallback(
        (
            RunningSubtree(sid),
            Sequence(children=(condition_to_subtree(model.pre), EnterSubtree(sid))),
        )
    )
    return Sequence(children=(gate, inner, ExitSubtree(sid)), subtree_id=sid)


def build_macro(sequence, macro_id: str | None = None) -> MacroAction:
    sequence = tuple(sequence)
    sid = macro_id or default_macro_id(sequence)
    return MacroAction(
        macro_id=sid,
        sequence=sequence,
        model=compose_macro(sequence, sid),
        body=preplan_subtree(sequence, sid),
    )


def rebind_action(action: ActionModel, old_self: str, new_self: str) -> ActionModel:
    """Rebind a robot-parameterized ground action to another robot."""
    if old_self == new_self:
        return action

    def swap(name):
        return new_self if name == old_self else name

    def swap_literals(literals):
        return frozenset(
            Literal(l.predicate, tuple(swap(a) for a in l.args)) for l in literals
        )

    return ActionModel(
        name=action.name,
        args=tuple(swap(a) for a in action.args),
        pre=swap_literals(action.pre),
        add=swap_literals(action.add),
        delete=swap_literals(action.delete),
        duration=action.duration,
        kind=action.kind,
    )


@dataclass(frozen=True)
class RegisterResult:
    problem: Problem
    macros: tuple[MacroAction, ...]
    dropped: tuple[tuple[int, str, CoherenceFailure], ...]


def register_macros(problem: Problem, per_robot_sequences) -> RegisterResult:
    """Compose proposals and add each macro to every robot able to run it.

    ``per_robot_sequences`` maps proposer index to {name: atomic sequence}
    (sequences bound to the proposer). A macro lands in the space of every
    robot whose atomic actions cover the whole rebound sequence, and
    duplicate models register once. Uncomposable sequences are dropped and
    reported.
    """
    macros: list[MacroAction] = []
    by_sequence: dict[tuple, MacroAction] = {}
    id_owner: dict[str, tuple] = {}
    dropped = []
    new_spaces = [list(space) for space in problem.action_spaces]
    atomic_spaces = [set(space) for space in problem.action_spaces]

    for proposer, sequences in enumerate(per_robot_sequences):
        proposer_name = problem.robot_names[proposer]
        for name, sequence in sequences.items():
            sequence = tuple(sequence)
            failure = check_coherence(sequence)
            if failure is not None:
                dropped.append((proposer, name, failure))
                continue
            for robot in range(problem.robots):
                robot_name = problem.robot_names[robot]
                rebound = tuple(
                    rebind_action(a, proposer_name, robot_name) for a in sequence
                )
                if not all(a in atomic_spaces[robot] for a in rebound):
                    continue
                sig = tuple((a.name, a.args) for a in rebound)
                macro = by_sequence.get(sig)
                if macro is None:
                    base_id = default_macro_id(rebound)
                    sid, k = base_id, 1
                    while sid in id_owner and id_owner[sid] != sig:
                        k += 1
                        sid = f"{base_id}#{k}"
                    id_owner[sid] = sig
                    macro = build_macro(rebound, sid)
                    by_sequence[sig] = macro
                    macros.append(macro)
                if macro.model not in new_spaces[robot]:
                    new_spaces[robot].append(macro.model)
    new_problem = Problem(
        robots=problem.robots,
        action_spaces=tuple(tuple(space) for space in new_spaces),
        init=problem.init,
        goal=problem.goal,
        objects=problem.objects,
        robot_names=problem.robot_names,
        robot_periods=problem.robot_periods,
    )
    return RegisterResult(
        problem=new_problem, macros=tuple(macros), dropped=tuple(dropped)
    )
