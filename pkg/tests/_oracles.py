"""Independent oracles: brute-force reachability and effect folding.

These deliberately avoid the planner, the macro composer, and the executor;
they are the other side of every dual-route check.
"""

from __future__ import annotations

import random

from btteam.world import ActionModel, Problem, apply_action, lit


def goal_reachable(problem: Problem, cap: int = 200_000) -> bool:
    """BFS over states using the union action set."""
    actions = problem.union_actions()
    start = problem.init
    goal = problem.goal
    if goal <= start:
        return True
    seen = {start}
    frontier = [start]
    expanded = 0
    while frontier:
        next_frontier = []
        for state in frontier:
            for action in actions:
                if not action.pre <= state:
                    continue
                nxt = apply_action(state, action)
                if nxt in seen:
                    continue
                if goal <= nxt:
                    return True
                seen.add(nxt)
                next_frontier.append(nxt)
                expanded += 1
                if expanded > cap:
                    raise RuntimeError("state cap exceeded in reachability oracle")
        frontier = next_frontier
    return False


def fold_effects(state, sequence):
    """Apply each action's effect map in order (no precondition checks)."""
    for action in sequence:
        state = apply_action(state, action)
    return state


def fold_checking(state, sequence):
    """Fold with precondition assertions; fails loudly on broken chains."""
    for action in sequence:
        assert action.pre <= state, f"{action} precondition broken mid-fold"
        state = apply_action(state, action)
    return state


def random_chained_sequence(rng: random.Random, n_literals: int = 10,
                            length: int = 4):
    """Random action sequence biased toward forming a usable chain.

    Each action needs a mix of already-produced and fresh literals and adds
    fresh ones, with occasional deletions of earlier facts (the interesting
    case for macro control wrappers). Not guaranteed coherent; callers
    filter with check_coherence.
    """
    literals = [lit(f"x{i}") for i in range(n_literals)]
    produced: list = []
    sequence = []
    for j in range(length):
        pool_old = [l for l in produced]
        pre = set()
        if pool_old and rng.random() < 0.85:
            pre.add(rng.choice(pool_old))
        fresh_pre = [l for l in literals if l not in pre]
        for _ in range(rng.randint(0, 1)):
            pre.add(rng.choice(fresh_pre))
        addable = [l for l in literals if l not in pre]
        add = set(rng.sample(addable, rng.randint(1, 2)))
        deletable = [l for l in literals if l not in add]
        delete = set()
        if deletable and rng.random() < 0.5:
            delete.add(rng.choice(deletable))
        sequence.append(
            ActionModel(
                name=f"s{j}",
                pre=frozenset(pre),
                add=frozenset(add),
                delete=frozenset(delete),
                duration=rng.randint(1, 2),
            )
        )
        produced.extend(add)
    return sequence, literals
