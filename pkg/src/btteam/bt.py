"""Behavior-tree nodes, deterministic tick semantics, and serialization.

Trees are immutable; planner edits and condition replacement produce new
trees. Ticking is a pure function of (tree, context) and returns the root
status plus the leftmost leaf decision reached, if any.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Optional, Union

from .world import ActionModel, Literal, LiteralSpace, sort_literals


class Status(enum.Enum):
    SUCCESS = "S"
    RUNNING = "R"
    FAILURE = "F"


S, R, F = Status.SUCCESS, Status.RUNNING, Status.FAILURE


class MalformedTreeError(ValueError):
    pass


class ConditionNotFoundError(LookupError):
    pass


class AmbiguousConditionError(LookupError):
    pass


@dataclass(frozen=True)
class Fallback:
    children: tuple["BTNode", ...]

    def __post_init__(self):
        if not self.children:
            raise MalformedTreeError("fallback with zero children")


@dataclass(frozen=True)
class Sequence:
    children: tuple["BTNode", ...]
    # Planner-level condition this sequence realizes, when it is a guard
    # built from a condition set; used by replace_condition.
    condition: Optional[frozenset] = None
    # Set on the wrapper sequence of a pre-planned subtree.
    subtree_id: Optional[str] = None

    def __post_init__(self):
        if not self.children:
            raise MalformedTreeError("sequence with zero children")


@dataclass(frozen=True)
class ConditionLeaf:
    literal: Literal


@dataclass(frozen=True)
class SuccessLeaf:
    """Always succeeds; realizes the empty conjunction."""


@dataclass(frozen=True)
class ActionLeaf:
    action: ActionModel


@dataclass(frozen=True)
class EnterSubtree:
    subtree_id: str


@dataclass(frozen=True)
class ExitSubtree:
    subtree_id: str


@dataclass(frozen=True)
class RunningSubtree:
    subtree_id: str


BTNode = Union[
    Fallback,
    Sequence,
    ConditionLeaf,
    SuccessLeaf,
    ActionLeaf,
    EnterSubtree,
    ExitSubtree,
    RunningSubtree,
]

ACTION = "action"
ENTER = "enter"
EXIT = "exit"


@dataclass(frozen=True)
class Decision:
    """Leftmost leaf decision reached during a tick."""

    kind: str
    action: Optional[ActionModel] = None
    subtree_id: Optional[str] = None
    # Subtree wrappers enclosing the decided leaf, outermost first.
    scope: tuple[str, ...] = ()


@dataclass(frozen=True)
class TickContext:
    state: frozenset = frozenset()
    belief_success: frozenset = frozenset()
    belief_failure: frozenset = frozenset()
    running_subtrees: frozenset = frozenset()
    failed_actions: frozenset = frozenset()


def condition_to_subtree(condition) -> Sequence:
    """Realize a condition set as a guard: one literal leaf per conjunct.

    Leaves appear in interned (lexicographic) order; the empty condition
    becomes a single always-success leaf.
    """
    literals = sort_literals(condition)
    cond = frozenset(condition)
    if not literals:
        return Sequence(children=(SuccessLeaf(),), condition=cond)
    return Sequence(
        children=tuple(ConditionLeaf(l) for l in literals), condition=cond
    )


def tick(root: BTNode, ctx: TickContext) -> tuple[Status, Optional[Decision]]:
    """Evaluate one tick; pure in (root, ctx)."""
    return _tick(root, ctx, ())


def _tick(node, ctx, scope):
    if isinstance(node, Fallback):
        decision = None
        for child in node.children:
            status, d = _tick(child, ctx, scope)
            if decision is None:
                decision = d
            if status is not F:
                return status, decision
        return F, decision
    if isinstance(node, Sequence):
        if node.subtree_id is not None:
            scope = scope + (node.subtree_id,)
        decision = None
        for child in node.children:
            status, d = _tick(child, ctx, scope)
            if decision is None:
                decision = d
            if status is not S:
                return status, decision
        return S, decision
    if isinstance(node, ConditionLeaf):
        l = node.literal
        if l in ctx.belief_success:
            return S, None
        if l in ctx.belief_failure:
            return F, None
        return (S if l in ctx.state else F), None
    if isinstance(node, SuccessLeaf):
        return S, None
    if isinstance(node, ActionLeaf):
        if node.action in ctx.failed_actions:
            return F, None
        return R, Decision(ACTION, action=node.action, scope=scope)
    if isinstance(node, EnterSubtree):
        return R, Decision(ENTER, subtree_id=node.subtree_id, scope=scope)
    if isinstance(node, ExitSubtree):
        return S, Decision(EXIT, subtree_id=node.subtree_id, scope=scope)
    if isinstance(node, RunningSubtree):
        return (S if node.subtree_id in ctx.running_subtrees else F), None
    raise MalformedTreeError(f"unknown node {node!r}")


def replace_condition(root: BTNode, condition, substitute: BTNode) -> BTNode:
    """Replace the unique guard tagged with ``condition`` by ``substitute``."""
    cond = frozenset(condition)
    count = _count_condition(root, cond)
    if count == 0:
        raise ConditionNotFoundError(f"condition not in tree: {sort_literals(cond)}")
    if count > 1:
        raise AmbiguousConditionError(
            f"{count} guards match condition: {sort_literals(cond)}"
        )
    return _substitute(root, cond, substitute)


def _count_condition(node, cond) -> int:
    if isinstance(node, Sequence) and node.condition == cond:
        return 1
    if isinstance(node, (Fallback, Sequence)):
        return sum(_count_condition(c, cond) for c in node.children)
    return 0


def _substitute(node, cond, substitute):
    if isinstance(node, Sequence) and node.condition == cond:
        return substitute
    if isinstance(node, Fallback):
        return Fallback(tuple(_substitute(c, cond, substitute) for c in node.children))
    if isinstance(node, Sequence):
        return Sequence(
            children=tuple(_substitute(c, cond, substitute) for c in node.children),
            condition=node.condition,
            subtree_id=node.subtree_id,
        )
    return node


def iter_nodes(root: BTNode):
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, (Fallback, Sequence)):
            stack.extend(reversed(node.children))


def tree_literals(root: BTNode) -> frozenset:
    literals = set()
    for node in iter_nodes(root):
        if isinstance(node, ConditionLeaf):
            literals.add(node.literal)
        elif isinstance(node, ActionLeaf):
            literals |= node.action.pre | node.action.add | node.action.delete
        elif isinstance(node, Sequence) and node.condition:
            literals |= node.condition
    return frozenset(literals)


# ---------------------------------------------------------------------------
# Serialization


def _action_dict(a: ActionModel) -> dict:
    return {
        "name": a.name,
        "args": list(a.args),
        "pre": [str(l) for l in sorted(a.pre)],
        "add": [str(l) for l in sorted(a.add)],
        "del": [str(l) for l in sorted(a.delete)],
        "duration": a.duration,
        "kind": a.kind,
    }


def _action_from_dict(d: dict) -> ActionModel:
    return ActionModel(
        name=d["name"],
        args=tuple(d["args"]),
        pre=frozenset(Literal.parse(t) for t in d["pre"]),
        add=frozenset(Literal.parse(t) for t in d["add"]),
        delete=frozenset(Literal.parse(t) for t in d["del"]),
        duration=d["duration"],
        kind=d["kind"],
    )


def to_dict(node: BTNode) -> dict:
    if isinstance(node, Fallback):
        return {"kind": "fallback", "children": [to_dict(c) for c in node.children]}
    if isinstance(node, Sequence):
        d = {"kind": "sequence", "children": [to_dict(c) for c in node.children]}
        if node.condition is not None:
            d["condition"] = [str(l) for l in sort_literals(node.condition)]
        if node.subtree_id is not None:
            d["subtree_id"] = node.subtree_id
        return d
    if isinstance(node, ConditionLeaf):
        return {"kind": "condition", "literal": str(node.literal)}
    if isinstance(node, SuccessLeaf):
        return {"kind": "success"}
    if isinstance(node, ActionLeaf):
        return {"kind": "action", "action": _action_dict(node.action)}
    if isinstance(node, EnterSubtree):
        return {"kind": "enter_subtree", "id": node.subtree_id}
    if isinstance(node, ExitSubtree):
        return {"kind": "exit_subtree", "id": node.subtree_id}
    if isinstance(node, RunningSubtree):
        return {"kind": "running_subtree", "id": node.subtree_id}
    raise MalformedTreeError(f"unknown node {node!r}")


def from_dict(d: dict) -> BTNode:
    kind = d["kind"]
    if kind == "fallback":
        return Fallback(tuple(from_dict(c) for c in d["children"]))
    if kind == "sequence":
        cond = d.get("condition")
        return Sequence(
            children=tuple(from_dict(c) for c in d["children"]),
            condition=frozenset(Literal.parse(t) for t in cond)
            if cond is not None
            else None,
            subtree_id=d.get("subtree_id"),
        )
    if kind == "condition":
        return ConditionLeaf(Literal.parse(d["literal"]))
    if kind == "success":
        return SuccessLeaf()
    if kind == "action":
        return ActionLeaf(_action_from_dict(d["action"]))
    if kind == "enter_subtree":
        return EnterSubtree(d["id"])
    if kind == "exit_subtree":
        return ExitSubtree(d["id"])
    if kind == "running_subtree":
        return RunningSubtree(d["id"])
    raise MalformedTreeError(f"unknown node kind {kind!r}")


def dumps(node: BTNode) -> str:
    return json.dumps(to_dict(node), indent=2) + "\n"


def loads(text: str) -> BTNode:
    return from_dict(json.loads(text))


def to_text(node: BTNode, indent: int = 0) -> str:
    """Indented human-readable dump, used for golden tests."""
    pad = "  " * indent
    if isinstance(node, Fallback):
        lines = [f"{pad}Fallback"]
        lines += [to_text(c, indent + 1) for c in node.children]
        return "\n".join(lines)
    if isinstance(node, Sequence):
        tag = ""
        if node.condition is not None:
            tag = f" cond={{{', '.join(str(l) for l in sort_literals(node.condition))}}}"
        if node.subtree_id is not None:
            tag += f" subtree={node.subtree_id}"
        lines = [f"{pad}Sequence{tag}"]
        lines += [to_text(c, indent + 1) for c in node.children]
        return "\n".join(lines)
    if isinstance(node, ConditionLeaf):
        return f"{pad}Cond {node.literal}"
    if isinstance(node, SuccessLeaf):
        return f"{pad}AlwaysSuccess"
    if isinstance(node, ActionLeaf):
        return f"{pad}Act {node.action} [{node.action.kind} d={node.action.duration}]"
    if isinstance(node, EnterSubtree):
        return f"{pad}EnterSubtree {node.subtree_id}"
    if isinstance(node, ExitSubtree):
        return f"{pad}ExitSubtree {node.subtree_id}"
    if isinstance(node, RunningSubtree):
        return f"{pad}RunningSubtree {node.subtree_id}"
    raise MalformedTreeError(f"unknown node {node!r}")


# ---------------------------------------------------------------------------
# Compiled form: condition guards collapse to bitmask tests for fast ticking.
# Semantics are identical to tick(); the executor uses this path.


@dataclass(frozen=True)
class _CGroup:
    # Guard over literals fully inside the space: F iff some literal is
    # believed-false or neither believed-true nor in state.
    mask: int


@dataclass(frozen=True)
class _CCond:
    bit: int


@dataclass(frozen=True)
class _CFallback:
    children: tuple


@dataclass(frozen=True)
class _CSequence:
    children: tuple
    subtree_id: Optional[str] = None


@dataclass(frozen=True)
class MaskContext:
    state: int = 0
    belief_success: int = 0
    belief_failure: int = 0
    running_subtrees: frozenset = frozenset()
    failed_actions: frozenset = frozenset()


class CompiledTree:
    """A tree compiled against a literal space for mask-based ticking."""

    def __init__(self, root: BTNode, space: LiteralSpace):
        self.space = space
        self.root = self._compile(root)

    def _compile(self, node):
        if isinstance(node, Fallback):
            return _CFallback(tuple(self._compile(c) for c in node.children))
        if isinstance(node, Sequence):
            if node.subtree_id is None and all(
                isinstance(c, (ConditionLeaf, SuccessLeaf)) for c in node.children
            ):
                mask = 0
                for c in node.children:
                    if isinstance(c, ConditionLeaf):
                        mask |= 1 << self.space.bit(c.literal)
                return _CGroup(mask)
            return _CSequence(
                tuple(self._compile(c) for c in node.children), node.subtree_id
            )
        if isinstance(node, ConditionLeaf):
            return _CCond(self.space.bit(node.literal))
        return node

    def tick(self, ctx: MaskContext) -> tuple[Status, Optional[Decision]]:
        return self._tick(self.root, ctx, ())

    def _tick(self, node, ctx, scope):
        if isinstance(node, _CFallback):
            decision = None
            for child in node.children:
                status, d = self._tick(child, ctx, scope)
                if decision is None:
                    decision = d
                if status is not F:
                    return status, decision
            return F, decision
        if isinstance(node, _CSequence):
            if node.subtree_id is not None:
                scope = scope + (node.subtree_id,)
            decision = None
            for child in node.children:
                status, d = self._tick(child, ctx, scope)
                if decision is None:
                    decision = d
                if status is not S:
                    return status, decision
            return S, decision
        if isinstance(node, _CGroup):
            # Per-literal rule: believed-true wins, then believed-false, then
            # the state; the guard fails iff any literal resolves to F.
            bad = node.mask & ~ctx.belief_success & (ctx.belief_failure | ~ctx.state)
            return (F if bad else S), None
        if isinstance(node, _CCond):
            bit = 1 << node.bit
            if ctx.belief_success & bit:
                return S, None
            if ctx.belief_failure & bit:
                return F, None
            return (S if ctx.state & bit else F), None
        if isinstance(node, SuccessLeaf):
            return S, None
        if isinstance(node, ActionLeaf):
            if node.action in ctx.failed_actions:
                return F, None
            return R, Decision(ACTION, action=node.action, scope=scope)
        if isinstance(node, EnterSubtree):
            return R, Decision(ENTER, subtree_id=node.subtree_id, scope=scope)
        if isinstance(node, ExitSubtree):
            return S, Decision(EXIT, subtree_id=node.subtree_id, scope=scope)
        if isinstance(node, RunningSubtree):
            return (S if node.subtree_id in ctx.running_subtrees else F), None
        raise MalformedTreeError(f"unknown compiled node {node!r}")
