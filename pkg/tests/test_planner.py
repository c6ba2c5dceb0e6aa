import random
from collections import deque

import pytest

from btteam import bt
from btteam.bt import ActionLeaf, Fallback, Sequence, condition_to_subtree
from btteam.planner import (
    PlanningTimeout,
    bt_expansion_baseline,
    expand_one_robot,
    has_subset,
    mrbtp,
    premise_check,
    regress,
    tagged_conditions,
)
from btteam.scenarios import gen_abstract
from btteam.sim import MODE_NONE, ExecConfig, run_episode
from btteam.world import ActionModel, Problem, lit

from _fixtures import fig_split_problem, w1_actions, w1_problem
from _oracles import goal_reachable


def test_premise_check_examples():
    acts = w1_actions()
    c = frozenset({lit("IsOpen", "door"), lit("Near", "pkg")})
    assert premise_check(c, acts["Open"])
    assert not premise_check(frozenset({lit("IsClose", "door")}), acts["Open"])
    assert not premise_check(frozenset(), acts["Open"])


def test_regress():
    acts = w1_actions()
    c = frozenset({lit("IsOpen", "door"), lit("Near", "pkg")})
    assert regress(c, acts["Open"]) == frozenset(
        {lit("IsClose", "door"), lit("Near", "pkg")}
    )
    assert regress(c, acts["Walk"]) == frozenset({lit("IsOpen", "door")})


def test_has_subset():
    x, y = lit("x"), lit("y")
    assert has_subset({x, y}, [frozenset({x})])
    assert not has_subset({x}, [frozenset({x, y})])
    assert has_subset(frozenset(), [frozenset()])


def test_expand_goal_in_tree():
    acts = w1_actions()
    problem = w1_problem()
    goal = problem.goal
    tree = Fallback((condition_to_subtree(goal),))
    tree, new = expand_one_robot(tree, list(acts.values()), goal)
    assert new == [frozenset({lit("IsOpen", "door"), lit("Near", "pkg")})]
    # In-tree replacement: root fallback still has one child, now expanded.
    assert len(tree.children) == 1
    expanded = tree.children[0]
    assert isinstance(expanded, Fallback)
    assert expanded.children[0].condition == goal
    assert isinstance(expanded.children[1].children[1], ActionLeaf)


def test_expand_cross_tree_appends_at_tail():
    acts = w1_actions()
    goal = frozenset({lit("InTarget", "pkg")})
    c = frozenset({lit("IsOpen", "door"), lit("Near", "pkg")})
    tree = Fallback((condition_to_subtree(goal),))
    tree, new = expand_one_robot(tree, [acts["Walk"]], c)
    assert new == [frozenset({lit("IsOpen", "door")})]
    assert len(tree.children) == 2
    appended = tree.children[1]
    assert appended.children[0].condition == c


def test_expand_no_premise_actions():
    tree = Fallback((condition_to_subtree({lit("g")}),))
    out, new = expand_one_robot(tree, [], {lit("g")})
    assert out is tree and new == []


def test_mrbtp_w1_chain():
    result = mrbtp(w1_problem())
    assert result.solution is not None
    # Hand-run of the loop: explores g, {IsOpen,Near}, {IsClose,Near}.
    assert result.stats.expanded_conditions == 3
    trace = run_episode(list(result.solution), w1_problem(), ExecConfig(seed=1))
    assert trace.outcome == "success" and trace.goal_reached


def test_mrbtp_goal_already_holds():
    problem = Problem(
        robots=1,
        action_spaces=((ActionModel(name="noop", add=frozenset({lit("x")})),),),
        init=frozenset({lit("g")}),
        goal=frozenset({lit("g")}),
    )
    result = mrbtp(problem)
    assert result.solution is not None
    assert result.stats.expanded_conditions == 0


def test_mrbtp_empty_goal():
    problem = Problem(
        robots=1,
        action_spaces=((ActionModel(name="noop", add=frozenset({lit("x")})),),),
        init=frozenset(),
        goal=frozenset(),
    )
    assert mrbtp(problem).solution is not None


def test_mrbtp_fig_split_cross_tree():
    problem = fig_split_problem()
    result = mrbtp(problem)
    assert result.solution is not None
    tree_h, tree_q = result.solution
    # The unload expansion of the humanoid's Has(fruit) condition lives in
    # the quadruped's tree, appended at the root fallback tail.
    assert len(tree_q.children) == 2
    appended = tree_q.children[1]
    assert appended.children[0].condition == frozenset({lit("Has", "fruit")})
    leaves = [n for n in bt.iter_nodes(tree_q) if isinstance(n, ActionLeaf)]
    assert {a.action.name for a in leaves} == {"Unload"}
    trace = run_episode(list(result.solution), problem, ExecConfig(seed=3))
    assert trace.outcome == "success" and trace.goal_reached


def test_mrbtp_unsolvable():
    problem = w1_problem()
    corrupted = Problem(
        robots=1,
        action_spaces=problem.action_spaces,
        init=problem.init,
        goal=problem.goal | {lit("never")},
    )
    assert not goal_reachable(corrupted)
    assert mrbtp(corrupted).solution is None


def test_baseline_equals_mrbtp_for_single_robot():
    problem = w1_problem()
    a = mrbtp(problem)
    b = bt_expansion_baseline(problem)
    assert [bt.dumps(t) for t in a.solution] == [bt.dumps(t) for t in b.solution]


def test_baseline_homogeneous_identical_trees():
    problem = w1_problem(robots=2)
    result = bt_expansion_baseline(problem)
    t0, t1 = result.solution
    assert bt.dumps(t0) == bt.dumps(t1)
    assert result.covered_start == (True, True)


def test_baseline_heterogeneous_partial_tree():
    problem = fig_split_problem()
    result = bt_expansion_baseline(problem)
    tree_h, _tree_q = result.solution
    leaves = [n for n in bt.iter_nodes(tree_h) if isinstance(n, ActionLeaf)]
    assert all(a.action.name != "Unload" for a in leaves)
    assert result.covered_start == (False, False)


def test_planning_timeout():
    problem = gen_abstract(seed=4, n_literals=10, n_actions=12, robots=3)
    with pytest.raises(PlanningTimeout):
        mrbtp(problem, budget_seconds=0.0)


def test_determinism_byte_identical_trees():
    problem = w1_problem(robots=2)
    first = [bt.dumps(t) for t in mrbtp(problem).solution]
    second = [bt.dumps(t) for t in mrbtp(problem).solution]
    assert first == second


# ---------------------------------------------------------------------------
# Reference loop built on the public one-step expansion; the mask engine must
# produce byte-identical trees.


def mrbtp_reference(problem: Problem):
    goal = problem.goal
    trees = [Fallback((condition_to_subtree(goal),)) for _ in range(problem.robots)]
    if goal <= problem.init:
        return trees
    queue = deque([goal])
    generated = {goal}
    explored = []
    while queue:
        c = queue.popleft()
        if has_subset(c, explored):
            continue
        explored.append(c)
        for i in range(problem.robots):
            trees[i], new = expand_one_robot(trees[i], problem.action_spaces[i], c)
            if any(ca <= problem.init for ca in new):
                return trees
            for ca in new:
                if ca not in generated:
                    generated.add(ca)
                    queue.append(ca)
    return None


@pytest.mark.parametrize("seed", range(30))
def test_engine_matches_reference_loop(seed):
    problem = gen_abstract(seed=seed, n_literals=7, n_actions=8, robots=2)
    reference = mrbtp_reference(problem)
    result = mrbtp(problem)
    if reference is None:
        assert result.solution is None
    else:
        assert result.solution is not None
        assert [bt.dumps(t) for t in result.solution] == [
            bt.dumps(t) for t in reference
        ]


@pytest.mark.parametrize("seed", range(40))
def test_verdict_matches_reachability_oracle(seed):
    for corrupt in (False, True):
        problem = gen_abstract(
            seed=seed, n_literals=8, n_actions=10, robots=2, corrupt=corrupt
        )
        assert (mrbtp(problem).solution is not None) == goal_reachable(problem)


@pytest.mark.parametrize("seed", range(12))
def test_soundness_solution_executes(seed):
    problem = gen_abstract(seed=seed * 101 + 7, n_literals=8, n_actions=10, robots=2)
    result = mrbtp(problem)
    if result.solution is None:
        return
    trace = run_episode(
        list(result.solution),
        problem,
        ExecConfig(seed=seed, intention_mode=MODE_NONE, step_budget=120),
    )
    assert trace.outcome == "success" and trace.goal_reached


def test_complexity_guard_pops_bounded_by_state_space():
    for seed in range(10):
        problem = gen_abstract(seed=seed, n_literals=6, n_actions=8, robots=2)
        result = mrbtp(problem)
        assert result.stats.expanded_conditions <= 2 ** 6
