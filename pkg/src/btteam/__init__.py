"""btteam: multi-robot behavior-tree planning and execution.

Plan one behavior tree per robot by cross-tree backward expansion, execute
the tree set under an intention-sharing protocol in a deterministic
simulator, and optionally accelerate planning with pre-planned macro
subtrees from a pluggable advisor.
"""

from .bt import (
    ActionLeaf,
    ConditionLeaf,
    Decision,
    EnterSubtree,
    ExitSubtree,
    Fallback,
    RunningSubtree,
    Sequence,
    Status,
    SuccessLeaf,
    TickContext,
    condition_to_subtree,
    replace_condition,
    tick,
)
from .macros import (
    IncoherentSequenceError,
    MacroAction,
    check_coherence,
    compose_macro,
    preplan_subtree,
    register_macros,
)
from .planner import (
    PlanningTimeout,
    PlanResult,
    bt_expansion_baseline,
    expand_one_robot,
    has_subset,
    mrbtp,
    premise_check,
)
from .sim import ExecConfig, belief_spaces, broadcast_update, run_episode
from .world import (
    ActionModel,
    Literal,
    Problem,
    apply_action,
    holds,
    lit,
    validate_action_model,
)

__all__ = [
    "ActionLeaf",
    "ActionModel",
    "ConditionLeaf",
    "Decision",
    "EnterSubtree",
    "ExecConfig",
    "ExitSubtree",
    "Fallback",
    "IncoherentSequenceError",
    "Literal",
    "MacroAction",
    "PlanResult",
    "PlanningTimeout",
    "Problem",
    "RunningSubtree",
    "Sequence",
    "Status",
    "SuccessLeaf",
    "TickContext",
    "apply_action",
    "belief_spaces",
    "broadcast_update",
    "bt_expansion_baseline",
    "check_coherence",
    "compose_macro",
    "condition_to_subtree",
    "expand_one_robot",
    "has_subset",
    "holds",
    "lit",
    "mrbtp",
    "premise_check",
    "preplan_subtree",
    "register_macros",
    "replace_condition",
    "run_episode",
    "tick",
    "validate_action_model",
]

__version__ = "0.1.0"
