"""Ground literals, states, conditions, action models, and planning problems."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

ATOMIC = "atomic"
MACRO = "macro"

_LITERAL_RE = re.compile(r"^\s*([A-Za-z_0-9][\w-]*)\s*(?:\(([^()]*)\))?\s*$")


class LiteralFormatError(ValueError):
    """Raised when a literal string cannot be parsed."""


@dataclass(frozen=True, order=True)
class Literal:
    """A fully ground predicate such as ``IsOpen(door-0)``.

    Ordering is lexicographic on (predicate, args), which fixes the total
    deterministic order used everywhere literals are iterated.
    """

    predicate: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(self.args)})"

    @staticmethod
    def parse(text: str) -> "Literal":
        m = _LITERAL_RE.match(text)
        if m is None:
            raise LiteralFormatError(f"bad literal: {text!r}")
        pred, arg_text = m.group(1), m.group(2)
        if arg_text is None or arg_text.strip() == "":
            if "(" in text and arg_text is None:
                raise LiteralFormatError(f"bad literal: {text!r}")
            return Literal(pred)
        args = tuple(a.strip() for a in arg_text.split(","))
        if any(not a for a in args):
            raise LiteralFormatError(f"empty argument in literal: {text!r}")
        return Literal(pred, args)


def lit(predicate: str, *args: str) -> Literal:
    return Literal(predicate, tuple(args))


def parse_literals(texts) -> frozenset[Literal]:
    return frozenset(Literal.parse(t) for t in texts)


def sort_literals(literals) -> list[Literal]:
    """Sort a literal collection into the canonical total order."""
    return sorted(literals)


def render_literals(literals) -> list[str]:
    return [str(l) for l in sort_literals(literals)]


# Conditions and states are both plain frozensets of literals; a condition is
# read as a conjunction, a state as a world snapshot.
Condition = frozenset
State = frozenset


@dataclass(frozen=True)
class ActionModel:
    """STRIPS-style action: precondition, add effects, delete effects.

    ``duration`` is measured in team steps; ``kind`` distinguishes composed
    long-horizon actions from atomic ones.
    """

    name: str
    args: tuple[str, ...] = ()
    pre: frozenset[Literal] = frozenset()
    add: frozenset[Literal] = frozenset()
    delete: frozenset[Literal] = frozenset()
    duration: int = 1
    kind: str = ATOMIC

    def __str__(self) -> str:
        if not self.args:
            return self.name
        return f"{self.name}({','.join(self.args)})"

    @property
    def sort_key(self) -> tuple:
        # Macros come first so planners prefer long-horizon actions.
        return (0 if self.kind == MACRO else 1, self.name, self.args)


def apply_action(state: frozenset, action: ActionModel) -> frozenset:
    """Pure effect map: (s ∪ add) minus deletes. Callers check preconditions."""
    return (state | action.add) - action.delete


def holds(condition: frozenset, state: frozenset) -> bool:
    """A conjunction holds iff it is a subset of the state."""
    return condition <= state


def validate_action_model(action: ActionModel) -> list[str]:
    """Return every violated action axiom (empty list means ok)."""
    violations = []
    overlap = action.add & action.delete
    if overlap:
        violations.append(f"add/del overlap: {render_literals(overlap)}")
    overlap = action.add & action.pre
    if overlap:
        violations.append(f"add/pre overlap: {render_literals(overlap)}")
    if action.duration < 1:
        violations.append(f"duration {action.duration} < 1")
    return violations


@dataclass(frozen=True)
class ObjectDef:
    name: str
    categories: tuple[str, ...] = ()


@dataclass(frozen=True)
class Problem:
    """A multi-robot planning instance: per-robot action spaces, start, goal."""

    robots: int
    action_spaces: tuple[tuple[ActionModel, ...], ...]
    init: frozenset[Literal]
    goal: frozenset[Literal]
    objects: tuple[ObjectDef, ...] = ()
    robot_names: tuple[str, ...] = ()
    robot_periods: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.robot_names:
            object.__setattr__(
                self, "robot_names", tuple(f"robot-{i}" for i in range(self.robots))
            )
        if not self.robot_periods:
            object.__setattr__(self, "robot_periods", (1,) * self.robots)

    def validate(self) -> list[str]:
        problems = []
        if self.robots < 1:
            problems.append("robot count < 1")
        if len(self.action_spaces) != self.robots:
            problems.append("action_spaces length != robot count")
        if len(self.robot_periods) != self.robots:
            problems.append("robot_periods length != robot count")
        if any(p < 1 for p in self.robot_periods):
            problems.append("robot period < 1")
        for space in self.action_spaces:
            for action in space:
                problems.extend(
                    f"{action}: {v}" for v in validate_action_model(action)
                )
        if self.objects:
            declared = {o.name for o in self.objects} | set(self.robot_names)
            for literal in self.all_literals():
                for arg in literal.args:
                    if arg not in declared:
                        problems.append(f"undeclared object {arg!r} in {literal}")
        return problems

    def all_literals(self) -> frozenset[Literal]:
        literals = set(self.init) | set(self.goal)
        for space in self.action_spaces:
            for a in space:
                literals |= a.pre | a.add | a.delete
        return frozenset(literals)

    def union_actions(self) -> list[ActionModel]:
        seen = {}
        for space in self.action_spaces:
            for a in space:
                seen.setdefault((a.name, a.args, a.kind), a)
        return [seen[k] for k in sorted(seen)]


class LiteralSpace:
    """Dense literal-to-bit interning in lexicographic order.

    Conditions and states become integer bitmasks, giving O(1) subset and
    intersection tests plus deterministic iteration for free.
    """

    def __init__(self, literals):
        self._literals = tuple(sorted(set(literals)))
        self._bit = {l: i for i, l in enumerate(self._literals)}

    @classmethod
    def for_problem(cls, problem: Problem, extra=()) -> "LiteralSpace":
        return cls(set(problem.all_literals()) | set(extra))

    def __len__(self) -> int:
        return len(self._literals)

    def __contains__(self, literal: Literal) -> bool:
        return literal in self._bit

    def bit(self, literal: Literal) -> int:
        return self._bit[literal]

    def mask(self, literals) -> int:
        m = 0
        for l in literals:
            m |= 1 << self._bit[l]
        return m

    def mask_known(self, literals) -> int:
        """Mask of the literals present in this space; unknown ones dropped."""
        m = 0
        for l in literals:
            i = self._bit.get(l)
            if i is not None:
                m |= 1 << i
        return m

    def literals(self, mask: int) -> tuple[Literal, ...]:
        out = []
        i = 0
        while mask:
            if mask & 1:
                out.append(self._literals[i])
            mask >>= 1
            i += 1
        return tuple(out)

    def all(self) -> tuple[Literal, ...]:
        return self._literals
