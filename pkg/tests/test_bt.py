import random

import pytest

from btteam import bt
from btteam.bt import (
    ActionLeaf,
    AmbiguousConditionError,
    CompiledTree,
    ConditionLeaf,
    ConditionNotFoundError,
    EnterSubtree,
    ExitSubtree,
    Fallback,
    MalformedTreeError,
    MaskContext,
    RunningSubtree,
    Sequence,
    Status,
    SuccessLeaf,
    TickContext,
    condition_to_subtree,
    replace_condition,
    tick,
)
from btteam.world import ActionModel, LiteralSpace, lit

from _fixtures import w1_actions

S, R, F = Status.SUCCESS, Status.RUNNING, Status.FAILURE


def ctx(state=(), bs=(), bf=(), running=(), failed=()):
    return TickContext(
        state=frozenset(state),
        belief_success=frozenset(bs),
        belief_failure=frozenset(bf),
        running_subtrees=frozenset(running),
        failed_actions=frozenset(failed),
    )


def test_condition_to_subtree_ordering():
    node = condition_to_subtree({lit("Near", "p"), lit("IsOpen", "d")})
    assert isinstance(node, Sequence)
    assert [c.literal for c in node.children] == [lit("IsOpen", "d"), lit("Near", "p")]
    assert node.condition == frozenset({lit("Near", "p"), lit("IsOpen", "d")})


def test_condition_to_subtree_singleton_and_empty():
    single = condition_to_subtree({lit("x")})
    assert [type(c) for c in single.children] == [ConditionLeaf]
    empty = condition_to_subtree(frozenset())
    assert isinstance(empty.children[0], SuccessLeaf)
    assert tick(empty, ctx())[0] is S


def test_tick_goal_holds():
    goal = condition_to_subtree({lit("g")})
    assert tick(Fallback((goal,)), ctx(state=[lit("g")])) == (S, None)


def test_tick_sequence_failed_guard():
    a = ActionModel(name="a")
    tree = Sequence((ConditionLeaf(lit("x")), ActionLeaf(a)))
    assert tick(tree, ctx()) == (F, None)


def test_tick_action_leaf_returns_running_decision():
    a = ActionModel(name="a")
    status, decision = tick(ActionLeaf(a), ctx())
    assert status is R and decision.kind == bt.ACTION and decision.action == a


def test_tick_failed_action_leaf():
    a = ActionModel(name="a")
    assert tick(ActionLeaf(a), ctx(failed=[a]))[0] is F


def test_tick_belief_overrides_state():
    # Figure-2 style: the door condition is skipped via belief success and
    # the walk action is selected even though the door is really closed.
    acts = w1_actions()
    tree = Fallback(
        (
            condition_to_subtree({lit("InTarget", "pkg")}),
            Sequence(
                (
                    condition_to_subtree({lit("IsOpen", "door")}),
                    ActionLeaf(acts["Walk"]),
                )
            ),
        )
    )
    state = [lit("IsClose", "door")]
    assert tick(tree, ctx(state=state))[0] is F
    status, decision = tick(tree, ctx(state=state, bs=[lit("IsOpen", "door")]))
    assert status is R and decision.action == acts["Walk"]
    assert tick(tree, ctx(state=state, bf=[lit("InTarget", "pkg")]))[0] is F


def test_tick_belief_failure_blocks_condition():
    leaf = ConditionLeaf(lit("x"))
    assert tick(leaf, ctx(state=[lit("x")], bf=[lit("x")]))[0] is F
    assert tick(leaf, ctx(state=[], bs=[lit("x")]))[0] is S


def test_subtree_control_leaves():
    assert tick(RunningSubtree("m"), ctx())[0] is F
    assert tick(RunningSubtree("m"), ctx(running=["m"]))[0] is S
    status, decision = tick(EnterSubtree("m"), ctx())
    assert status is R and decision.kind == bt.ENTER
    status, decision = tick(ExitSubtree("m"), ctx())
    assert status is S and decision.kind == bt.EXIT


def test_decision_scope_tracks_wrappers():
    a = ActionModel(name="a")
    tree = Sequence(
        children=(Sequence(children=(ActionLeaf(a),), subtree_id="inner"),),
        subtree_id="outer",
    )
    _status, decision = tick(tree, ctx())
    assert decision.scope == ("outer", "inner")


def test_malformed_tree_rejected():
    with pytest.raises(MalformedTreeError):
        Fallback(())
    with pytest.raises(MalformedTreeError):
        Sequence(())


def test_replace_condition():
    cond = frozenset({lit("c")})
    guard = condition_to_subtree(cond)
    sub = Fallback((condition_to_subtree(cond), Sequence((condition_to_subtree({lit("p")}), ActionLeaf(ActionModel(name="a"))))))
    tree = Fallback((guard,))
    replaced = replace_condition(tree, cond, sub)
    assert replaced == Fallback((sub,))
    with pytest.raises(ConditionNotFoundError):
        replace_condition(tree, frozenset({lit("zz")}), sub)
    single = condition_to_subtree(cond)
    assert replace_condition(single, cond, sub) == sub
    with pytest.raises(AmbiguousConditionError):
        replace_condition(Fallback((guard, guard)), cond, sub)


def _random_tree(rng, literals, actions, depth=3):
    if depth == 0 or rng.random() < 0.3:
        roll = rng.random()
        if roll < 0.5:
            return ConditionLeaf(rng.choice(literals))
        if roll < 0.8:
            return ActionLeaf(rng.choice(actions))
        return rng.choice(
            [SuccessLeaf(), EnterSubtree("s"), ExitSubtree("s"), RunningSubtree("s")]
        )
    children = tuple(
        _random_tree(rng, literals, actions, depth - 1)
        for _ in range(rng.randint(1, 3))
    )
    return Fallback(children) if rng.random() < 0.5 else Sequence(children)


def test_fallback_flattening_law():
    rng = random.Random(11)
    literals = [lit(f"p{i}") for i in range(6)]
    actions = [ActionModel(name=f"a{i}") for i in range(3)]
    for _ in range(300):
        t1, t2, t3 = (_random_tree(rng, literals, actions, 2) for _ in range(3))
        context = ctx(
            state=rng.sample(literals, rng.randint(0, 6)),
            running=["s"] if rng.random() < 0.5 else [],
        )
        nested = Fallback((t1, Fallback((t2, t3))))
        flat = Fallback((t1, t2, t3))
        assert tick(nested, context) == tick(flat, context)


def test_tick_pure():
    rng = random.Random(5)
    literals = [lit(f"p{i}") for i in range(5)]
    actions = [ActionModel(name=f"a{i}") for i in range(3)]
    tree = _random_tree(rng, literals, actions, 3)
    context = ctx(state=literals[:2])
    assert tick(tree, context) == tick(tree, context)


def test_serialization_round_trip():
    rng = random.Random(13)
    literals = [lit(f"p{i}", "o") for i in range(4)]
    actions = [
        ActionModel(
            name=f"a{i}",
            args=("o",),
            pre=frozenset(rng.sample(literals, 1)),
            add=frozenset(rng.sample(literals, 1)),
            duration=rng.randint(1, 3),
        )
        for i in range(3)
    ]
    for _ in range(40):
        tree = Fallback(
            (
                condition_to_subtree(set(rng.sample(literals, 2))),
                _random_tree(rng, literals, actions, 3),
            )
        )
        again = bt.loads(bt.dumps(tree))
        assert again == tree
        assert bt.dumps(again) == bt.dumps(tree)


def test_text_dump_golden():
    acts = w1_actions()
    tree = Fallback(
        (
            condition_to_subtree({lit("InTarget", "pkg")}),
            Sequence(
                (condition_to_subtree({lit("IsClose", "door")}), ActionLeaf(acts["Open"]))
            ),
        )
    )
    assert bt.to_text(tree) == (
        "Fallback\n"
        "  Sequence cond={InTarget(pkg)}\n"
        "    Cond InTarget(pkg)\n"
        "  Sequence\n"
        "    Sequence cond={IsClose(door)}\n"
        "      Cond IsClose(door)\n"
        "    Act Open(door) [atomic d=1]"
    )


def test_compiled_tree_matches_reference_tick():
    rng = random.Random(23)
    literals = [lit(f"p{i}") for i in range(8)]
    actions = [ActionModel(name=f"a{i}") for i in range(4)]
    for _ in range(400):
        tree = Fallback(
            (
                condition_to_subtree(set(rng.sample(literals, rng.randint(0, 3)))),
                _random_tree(rng, literals, actions, 3),
            )
        )
        space = LiteralSpace(literals)
        compiled = CompiledTree(tree, space)
        state = rng.sample(literals, rng.randint(0, 8))
        bs = rng.sample(literals, rng.randint(0, 2))
        bf = [l for l in rng.sample(literals, rng.randint(0, 2)) if l not in bs]
        running = ["s"] if rng.random() < 0.5 else []
        failed = [rng.choice(actions)] if rng.random() < 0.3 else []
        reference = tick(tree, ctx(state, bs, bf, running, failed))
        fast = compiled.tick(
            MaskContext(
                state=space.mask(state),
                belief_success=space.mask(bs),
                belief_failure=space.mask(bf),
                running_subtrees=frozenset(running),
                failed_actions=frozenset(failed),
            )
        )
        assert fast == reference
