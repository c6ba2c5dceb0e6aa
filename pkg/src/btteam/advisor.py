"""Macro-sequence advice from a pluggable text-completion provider.

The provider is exchangeable (remote service, fixed file, scripted replies);
validation and the feedback loop never depend on which one is plugged in, so
the whole suite runs offline.
"""

from __future__ import annotations

import json
import logging
import os
import re
import urllib.request
from dataclasses import dataclass, field
from typing import Optional, Protocol

from .macros import check_coherence
from .world import ActionModel, Problem, sort_literals

log = logging.getLogger(__name__)

SELF = "self"

_FENCE_RE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)
_CALL_RE = re.compile(r"^\s*([A-Za-z_][\w-]*)\s*\(([^()]*)\)\s*$")


class ProviderUnavailableError(RuntimeError):
    pass


class AdvisorProvider(Protocol):
    def send(self, prompt: str, schema: Optional[dict] = None) -> str: ...


class ScriptedProvider:
    """Replays a fixed list of replies; used to test the feedback loop."""

    def __init__(self, replies):
        self.replies = list(replies)
        self.calls = 0

    def send(self, prompt: str, schema: Optional[dict] = None) -> str:
        if self.calls >= len(self.replies):
            raise ProviderUnavailableError("scripted provider ran out of replies")
        reply = self.replies[self.calls]
        self.calls += 1
        return reply


class FixedReplyProvider:
    """Always returns the same text (e.g. loaded from a proposal file)."""

    def __init__(self, reply: str):
        self.reply = reply

    def send(self, prompt: str, schema: Optional[dict] = None) -> str:
        return self.reply


class RemoteProvider:
    """Minimal JSON-over-HTTP client for a chat-completion style endpoint.

    Request shape is configuration, not contract; the credential comes from
    the environment variable named in the config.
    """

    def __init__(self, endpoint: str, model: str, token_env: str = "BTTEAM_ADVISOR_TOKEN",
                 timeout: float = 60.0):
        self.endpoint = endpoint
        self.model = model
        self.token_env = token_env
        self.timeout = timeout

    def send(self, prompt: str, schema: Optional[dict] = None) -> str:
        token = os.environ.get(self.token_env)
        if not token:
            raise ProviderUnavailableError(f"missing credential in ${self.token_env}")
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        }
        if schema is not None:
            body["response_format"] = {
                "type": "json_schema",
                "json_schema": schema,
            }
        request = urllib.request.Request(
            self.endpoint,
            data=json.dumps(body).encode("utf-8"),
            headers={
                "Content-Type": "application/json",
                "Authorization": f"Bearer {token}",
            },
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                payload = json.loads(response.read().decode("utf-8"))
        except OSError as e:
            raise ProviderUnavailableError(str(e)) from e
        try:
            return payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError) as e:
            raise ProviderUnavailableError(f"unexpected reply shape: {e}") from e


@dataclass(frozen=True)
class Proposal:
    """Validated per-robot macro sequences, both raw strings and ground."""

    entries: tuple[dict, ...]
    sequences: tuple[dict, ...]
    round_index: int = 1

    def to_json(self) -> str:
        return json.dumps(
            {"multi_robot_subtree_ls": [dict(e) for e in self.entries]}, indent=2
        ) + "\n"


@dataclass(frozen=True)
class ValidationResult:
    proposal: Optional[Proposal]
    feedback: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return self.proposal is not None


# ---------------------------------------------------------------------------
# Prompt


def _schema_signatures(problem: Problem, robot: int) -> dict[str, int]:
    """Schema name -> object arity for one robot's ground space."""
    signatures: dict[str, int] = {}
    for action in problem.action_spaces[robot]:
        signatures.setdefault(action.name, len(action.args))
    return signatures


def _render_space(problem: Problem, robot: int) -> list[str]:
    return sorted(_schema_signatures(problem, robot))

def build_prompt(problem: Problem, few_shot: str = "", domain=None) -> str:
    """Render the advice prompt: conditions, actions, few-shot example, task
    information, and the system instructions with the robot count filled in."""
    lines = []
    if domain is not None:
        lines.append("[Condition]")
        lines.append(
            ", ".join(
                f"{p.name}_" + "_".join(f"<{c}>" for c in p.categories)
                if p.categories
                else p.name
                for p in domain.predicates
            )
        )
        lines.append("")
        lines.append("[Action]")
        lines.append(
            ", ".join(
                f"{s.name}_" + "_".join(f"<{c}>" for c in s.params)
                if s.params
                else s.name
                for s in domain.schemas
            )
        )
        lines.append("")
    if few_shot:
        lines.append("[Example]")
        lines.append(few_shot.strip())
        lines.append("")
    lines.append("[Task Information]")
    task = {
        "goal": [str(l) for l in sort_literals(problem.goal)],
        "init_state": [str(l) for l in sort_literals(problem.init)],
        "objects": [o.name for o in problem.objects],
        "action_space": [
            _render_space(problem, i) for i in range(problem.robots)
        ],
    }
    lines.append(json.dumps(task, indent=2))
    lines.append("")
    n = problem.robots
    lines.append("[System]")
    lines.append(
        "1. For each task, generate all possible composite actions for each "
        "robot based on its goals, initial state, and available action space. "
        "Repetition of composite actions is permissible."
    )
    lines.append(
        "2. [multi_robot_subtree_ls] is a list where each entry is a dictionary "
        "containing all task-related composite actions for a robot. Keys are "
        "composite action names, and values are sequences of atomic actions, "
        "ordered such that each action's effect serves as the precondition "
        "for the next."
    )
    lines.append(
        f"3. The length of [multi_robot_subtree_ls] equals the number of robots. "
        f"With {n} robots, [multi_robot_subtree_ls] contains {n} dictionaries, "
        f"each with 1-5 key-value pairs."
    )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Validation


def _extract_json(raw: str):
    text = raw.strip()
    fenced = _FENCE_RE.search(text)
    if fenced:
        text = fenced.group(1).strip()
    start = min(
        (i for i in (text.find("["), text.find("{")) if i >= 0), default=-1
    )
    if start > 0:
        text = text[start:]
    return json.loads(text)


def _proposal_list(data):
    if isinstance(data, dict) and "multi_robot_subtree_ls" in data:
        data = data["multi_robot_subtree_ls"]
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list) or not all(isinstance(d, dict) for d in data):
        raise ValueError("expected a list of dictionaries")
    return data


def _find_model(problem: Problem, robot: int, name: str, args: tuple[str, ...]):
    for action in problem.action_spaces[robot]:
        if action.name == name and action.args == args and action.kind == "atomic":
            return action
    return None


def validate_proposal(raw: str, problem: Problem) -> ValidationResult:
    """Run the three checks in order: grammar/format, coherence, count.

    All violations found are reported together as natural-language feedback
    lines; a proposal parses only when every check passes.
    """
    n = problem.robots
    object_names = {o.name for o in problem.objects}
    feedback: list[str] = []

    try:
        entries = _proposal_list(_extract_json(raw))
    except (ValueError, json.JSONDecodeError) as e:
        return ValidationResult(
            None, (f"The output could not be parsed as JSON: {e}.",)
        )

    bad_objects: list[str] = []
    bad_predicates: list[str] = []
    parsed: list[dict] = []
    for robot, entry in enumerate(entries):
        robot_idx = min(robot, n - 1)
        signatures = _schema_signatures(problem, robot_idx)
        sequences: dict[str, list] = {}
        for name, calls in entry.items():
            sequence = []
            for call in calls:
                m = _CALL_RE.match(call)
                if m is None:
                    bad_predicates.append(call)
                    continue
                pred, arg_text = m.group(1), m.group(2)
                args = tuple(a.strip() for a in arg_text.split(",") if a.strip())
                if pred not in signatures:
                    bad_predicates.append(call)
                    continue
                if not args or args[0] != SELF:
                    bad_predicates.append(call)
                    continue
                objects = args[1:]
                unknown = [o for o in objects if o not in object_names]
                if unknown:
                    bad_objects.extend(unknown)
                    continue
                if len(objects) != signatures[pred]:
                    bad_predicates.append(call)
                    continue
                model = _find_model(problem, robot_idx, pred, objects)
                if model is None:
                    bad_predicates.append(call)
                    continue
                sequence.append(model)
            sequences[name] = sequence
        parsed.append(sequences)

    if bad_objects:
        rendered = ",".join(f'"{o}"' for o in dict.fromkeys(bad_objects))
        feedback.append(
            f"The object [{rendered}] does not exist and must be an element "
            f"of the set [objects]."
        )
    if bad_predicates:
        rendered = ",".join(f'"{p}"' for p in dict.fromkeys(bad_predicates))
        feedback.append(
            f"The action predicates [{rendered}] either do not exist or are "
            f"incorrectly formatted. They must be part of the set [action_space]."
        )

    grammar_ok = not bad_objects and not bad_predicates

    if grammar_ok:
        for robot, sequences in enumerate(parsed[:n]):
            for name, sequence in sequences.items():
                if not sequence:
                    continue
                failure = check_coherence(sequence)
                if failure is None:
                    continue
                feedback.append(f'"{name}" cannot be pre-planned.')
                j = failure.index
                if j >= 1:
                    prev, curr = sequence[j - 1], sequence[j]
                    prev_s = _render_call(prev)
                    curr_s = _render_call(curr)
                    feedback.append(
                        f'"{prev_s}" and "{curr_s}" cannot be pre-planned together.'
                    )
                    feedback.append(
                        f"[{prev_s}.add] = ({_render_set(prev.add)})"
                    )
                    feedback.append(
                        f"[{curr_s}.pre] = ({_render_set(curr.pre)})"
                    )
                    feedback.append(
                        f"[{prev_s}.add] condition does not belong to the "
                        f"[{curr_s}.pre] conditions."
                    )
                else:
                    feedback.append(failure.describe(tuple(sequence)))

    if len(entries) != n or any(
        not (1 <= len(e) <= 5) for e in entries
    ):
        feedback.append(
            f"The number of robots involved in this task is {n}, which implies "
            f"that the [multi_robot_subtree_ls] should contain {n} dictionaries. "
            f"Each of these dictionaries should have 1-5 key-value pairs. "
            f"Please revise accordingly."
        )

    if feedback:
        return ValidationResult(None, tuple(feedback))
    return ValidationResult(
        Proposal(
            entries=tuple({k: tuple(v) for k, v in e.items()} for e in entries),
            sequences=tuple(
                {k: tuple(v) for k, v in seqs.items()} for seqs in parsed
            ),
        ),
        (),
    )


def _render_call(action: ActionModel) -> str:
    return f"{action.name}({','.join((SELF,) + action.args)})"


def _render_set(literals) -> str:
    return ", ".join(f'"{l}"' for l in sort_literals(literals))


# ---------------------------------------------------------------------------
# Feedback loop


@dataclass(frozen=True)
class AdviceRound:
    reply: str
    feedback: tuple[str, ...]
    accepted: bool


@dataclass(frozen=True)
class AdviceResult:
    proposal: Optional[Proposal]
    rounds: tuple[AdviceRound, ...]

    def transcript_json(self) -> str:
        return json.dumps(
            [
                {
                    "round": i + 1,
                    "reply": r.reply,
                    "feedback": list(r.feedback),
                    "accepted": r.accepted,
                }
                for i, r in enumerate(self.rounds)
            ],
            indent=2,
        ) + "\n"


def advise(
    provider: AdvisorProvider,
    problem: Problem,
    few_shot: str = "",
    domain=None,
    max_rounds: int = 3,
) -> AdviceResult:
    """Prompt, validate, and feed back up to ``max_rounds`` times.

    Returns the first valid proposal, or none after exhaustion (the planner
    then runs macro-free). Provider trouble maps to none with a warning.
    """
    prompt = build_prompt(problem, few_shot=few_shot, domain=domain)
    rounds: list[AdviceRound] = []
    message = prompt
    for _ in range(max_rounds):
        try:
            reply = provider.send(message)
        except ProviderUnavailableError as e:
            log.warning("advice provider unavailable: %s", e)
            break
        result = validate_proposal(reply, problem)
        rounds.append(
            AdviceRound(reply=reply, feedback=result.feedback, accepted=result.ok)
        )
        if result.ok:
            proposal = Proposal(
                entries=result.proposal.entries,
                sequences=result.proposal.sequences,
                round_index=len(rounds),
            )
            return AdviceResult(proposal, tuple(rounds))
        message = (
            "Reflective Feedback:\n"
            + "\n".join(f"{i + 1}. {line}" for i, line in enumerate(result.feedback))
            + "\nPlease revise your previous output accordingly.\n\n"
            + prompt
        )
    return AdviceResult(None, tuple(rounds))
