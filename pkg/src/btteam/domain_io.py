"""JSON domain and problem files: parsing, validation, serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .grounding import ActionSchema, PredicateDef, ground_actions
from .world import ActionModel, Literal, LiteralFormatError, ObjectDef, Problem


class ProblemFormatError(ValueError):
    """Malformed instance or domain text; carries line/column when known."""

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} (line {line}, col {col})"
        super().__init__(message)


class UndeclaredObjectError(ProblemFormatError):
    pass


class UnknownPredicateError(ProblemFormatError):
    pass


@dataclass(frozen=True)
class Domain:
    """Predicate vocabulary plus action schemas, as loaded from a domain file."""

    predicates: tuple[PredicateDef, ...] = ()
    schemas: tuple[ActionSchema, ...] = ()

    def schema(self, name: str) -> ActionSchema:
        for s in self.schemas:
            if s.name == name:
                return s
        raise KeyError(name)

    def categories(self) -> frozenset[str]:
        cats = set()
        for p in self.predicates:
            cats.update(p.categories)
        for s in self.schemas:
            cats.update(s.params)
        return frozenset(cats)

    def predicate_names(self) -> frozenset[str]:
        return frozenset(p.name for p in self.predicates)


def _load_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ProblemFormatError(e.msg, e.lineno, e.colno) from e


def load_domain(text: str) -> Domain:
    data = _load_json(text)
    predicates = tuple(
        PredicateDef(
            name=p["name"],
            arity=int(p["arity"]),
            categories=tuple(p.get("categories", ())),
        )
        for p in data.get("predicates", ())
    )
    schemas = tuple(
        ActionSchema(
            name=s["name"],
            params=tuple(s.get("params", ())),
            pre=tuple(s.get("pre", ())),
            add=tuple(s.get("add", ())),
            delete=tuple(s.get("del", s.get("delete", ()))),
            duration=int(s.get("duration", 1)),
        )
        for s in data.get("action_schemas", ())
    )
    return Domain(predicates=predicates, schemas=schemas)


def dump_domain(domain: Domain) -> str:
    data = {
        "predicates": [
            {"name": p.name, "arity": p.arity, "categories": list(p.categories)}
            for p in domain.predicates
        ],
        "action_schemas": [
            {
                "name": s.name,
                "params": list(s.params),
                "pre": list(s.pre),
                "add": list(s.add),
                "del": list(s.delete),
                "duration": s.duration,
            }
            for s in domain.schemas
        ],
    }
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _parse_literal(text: str) -> Literal:
    try:
        return Literal.parse(text)
    except LiteralFormatError as e:
        raise ProblemFormatError(str(e)) from e


def _parse_objects(raw) -> tuple[ObjectDef, ...]:
    objects = []
    for entry in raw:
        if isinstance(entry, str):
            objects.append(ObjectDef(entry))
        else:
            objects.append(
                ObjectDef(entry["name"], tuple(entry.get("categories", ())))
            )
    return tuple(objects)


def _parse_ground_action(raw) -> ActionModel:
    return ActionModel(
        name=raw["name"],
        args=tuple(raw.get("args", ())),
        pre=frozenset(_parse_literal(t) for t in raw.get("pre", ())),
        add=frozenset(_parse_literal(t) for t in raw.get("add", ())),
        delete=frozenset(_parse_literal(t) for t in raw.get("del", raw.get("delete", ()))),
        duration=int(raw.get("duration", 1)),
        kind=raw.get("kind", "atomic"),
    )


def parse_problem(text: str, domain: Domain | None = None) -> Problem:
    """Parse an instance file.

    ``action_space`` entries are either schema-name lists (requires ``domain``)
    or explicit ground-action objects. The result round-trips through
    ``serialize_problem``.
    """
    data = _load_json(text)
    if not isinstance(data, dict):
        raise ProblemFormatError("instance file must be a JSON object")
    objects = _parse_objects(data.get("objects", ()))
    spaces_raw = data.get("action_space", ())
    robots = int(data.get("robots", len(spaces_raw)))
    if robots < 1:
        raise ProblemFormatError("no robots declared")
    robot_names = tuple(
        data.get("robot_names", [f"robot-{i}" for i in range(robots)])
    )

    spaces = []
    for i, entry in enumerate(spaces_raw):
        space = []
        for item in entry:
            if isinstance(item, str):
                if domain is None:
                    raise ProblemFormatError(
                        f"action_space[{i}] names schema {item!r} but no domain given"
                    )
                try:
                    schema = domain.schema(item)
                except KeyError:
                    raise UnknownPredicateError(f"unknown action schema {item!r}")
                space.extend(
                    ground_actions(
                        [schema],
                        objects,
                        self_name=robot_names[i],
                        known_categories=domain.categories(),
                    )
                )
            else:
                space.append(_parse_ground_action(item))
        spaces.append(tuple(space))

    problem = Problem(
        robots=robots,
        action_spaces=tuple(spaces),
        init=frozenset(_parse_literal(t) for t in data.get("init_state", ())),
        goal=frozenset(_parse_literal(t) for t in data.get("goal", ())),
        objects=objects,
        robot_names=robot_names,
        robot_periods=tuple(data.get("robot_periods", ())) or (1,) * robots,
    )

    if objects:
        declared = {o.name for o in objects} | set(robot_names)
        known_predicates = (
            domain.predicate_names() if domain and domain.predicates else None
        )
        for literal in sorted(problem.init | problem.goal):
            if known_predicates is not None and literal.predicate not in known_predicates:
                raise UnknownPredicateError(f"unknown predicate in {literal}")
            for arg in literal.args:
                if arg not in declared:
                    raise UndeclaredObjectError(f"undeclared object {arg!r} in {literal}")
    return problem


def _ground_action_dict(action: ActionModel) -> dict:
    return {
        "name": action.name,
        "args": list(action.args),
        "pre": [str(l) for l in sorted(action.pre)],
        "add": [str(l) for l in sorted(action.add)],
        "del": [str(l) for l in sorted(action.delete)],
        "duration": action.duration,
        "kind": action.kind,
    }


def serialize_problem(problem: Problem) -> str:
    """Serialize with explicit ground action spaces (round-trip stable)."""
    data = {
        "robots": problem.robots,
        "robot_names": list(problem.robot_names),
        "robot_periods": list(problem.robot_periods),
        "goal": [str(l) for l in sorted(problem.goal)],
        "init_state": [str(l) for l in sorted(problem.init)],
        "objects": [
            {"name": o.name, "categories": list(o.categories)} for o in problem.objects
        ],
        "action_space": [
            [_ground_action_dict(a) for a in space] for space in problem.action_spaces
        ],
    }
    return json.dumps(data, indent=2) + "\n"
