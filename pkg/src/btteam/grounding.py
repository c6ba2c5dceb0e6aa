"""Action schemas with category-typed parameters and their grounding."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

from .world import ActionModel, Literal, ObjectDef

SELF = "self"

_PLACEHOLDER_RE = re.compile(r"\{(\d+)\}")


class UnknownCategoryError(ValueError):
    pass


class ArityMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class PredicateDef:
    name: str
    arity: int
    categories: tuple[str, ...] = ()


@dataclass(frozen=True)
class ActionSchema:
    """A lift-level action template.

    ``params`` lists one object category per positional parameter. Literal
    templates refer to parameters as ``{0}``, ``{1}`` ... and to the acting
    robot as ``self``.
    """

    name: str
    params: tuple[str, ...] = ()
    pre: tuple[str, ...] = ()
    add: tuple[str, ...] = ()
    delete: tuple[str, ...] = ()
    duration: int = 1

    def templates(self):
        return itertools.chain(self.pre, self.add, self.delete)


def _check_schema(schema: ActionSchema) -> None:
    arity = len(schema.params)
    for template in schema.templates():
        for m in _PLACEHOLDER_RE.finditer(template):
            idx = int(m.group(1))
            if idx >= arity:
                raise ArityMismatchError(
                    f"{schema.name}: template {template!r} uses parameter {idx}, "
                    f"schema has {arity}"
                )


def _instantiate(template: str, binding: tuple[str, ...], self_name: str | None) -> Literal:
    text = _PLACEHOLDER_RE.sub(lambda m: binding[int(m.group(1))], template)
    literal = Literal.parse(text)
    if SELF in literal.args:
        if self_name is None:
            raise ArityMismatchError(
                f"template {template!r} mentions 'self' but no self binding given"
            )
        literal = Literal(
            literal.predicate,
            tuple(self_name if a == SELF else a for a in literal.args),
        )
    return literal


def objects_by_category(objects) -> dict[str, list[str]]:
    by_cat: dict[str, list[str]] = {}
    for obj in objects:
        for cat in obj.categories:
            by_cat.setdefault(cat, []).append(obj.name)
    return by_cat


def ground_schema(
    schema: ActionSchema,
    objects,
    self_name: str | None = None,
    known_categories=None,
) -> list[ActionModel]:
    """Enumerate every valid parameter binding of one schema.

    Bindings follow object declaration order, candidates per parameter are the
    declared objects carrying that category, and repeated objects within one
    binding are skipped. Output order is deterministic. When
    ``known_categories`` is given, a parameter category outside it raises
    ``UnknownCategoryError``; a known category with no matching objects just
    yields no bindings.
    """
    _check_schema(schema)
    by_cat = objects_by_category(objects)
    candidate_lists = []
    for cat in schema.params:
        if known_categories is not None and cat not in known_categories:
            raise UnknownCategoryError(f"{schema.name}: unknown category {cat!r}")
        candidate_lists.append(by_cat.get(cat, []))
    grounded = []
    for binding in itertools.product(*candidate_lists):
        if len(set(binding)) != len(binding):
            continue
        grounded.append(
            ActionModel(
                name=schema.name,
                args=binding,
                pre=frozenset(_instantiate(t, binding, self_name) for t in schema.pre),
                add=frozenset(_instantiate(t, binding, self_name) for t in schema.add),
                delete=frozenset(
                    _instantiate(t, binding, self_name) for t in schema.delete
                ),
                duration=schema.duration,
            )
        )
    return grounded


def ground_actions(
    schemas,
    objects,
    self_name: str | None = None,
    known_categories=None,
) -> list[ActionModel]:
    """Ground a list of schemas against typed objects; deterministic order."""
    out = []
    for schema in schemas:
        out.extend(ground_schema(schema, objects, self_name, known_categories))
    return out
