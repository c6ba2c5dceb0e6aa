import random

import pytest

from btteam.world import (
    ActionModel,
    Literal,
    LiteralFormatError,
    LiteralSpace,
    apply_action,
    holds,
    lit,
    sort_literals,
    validate_action_model,
)


def test_literal_parse_and_format():
    l = Literal.parse("IsOpen(door-0)")
    assert l == lit("IsOpen", "door-0")
    assert str(l) == "IsOpen(door-0)"
    assert str(Literal.parse("Flag")) == "Flag"
    assert Literal.parse("In(a, b)") == lit("In", "a", "b")


def test_literal_parse_rejects_garbage():
    with pytest.raises(LiteralFormatError):
        Literal.parse("Open(self,door-0")
    with pytest.raises(LiteralFormatError):
        Literal.parse("Open(a,,b)")


def test_apply_action_door():
    open_door = ActionModel(
        name="Open",
        args=("d",),
        pre=frozenset({lit("IsClose", "d")}),
        add=frozenset({lit("IsOpen", "d")}),
        delete=frozenset({lit("IsClose", "d")}),
    )
    out = apply_action(frozenset({lit("IsClose", "d")}), open_door)
    assert out == frozenset({lit("IsOpen", "d")})


def test_apply_action_identity_and_absent_delete():
    noop = ActionModel(name="n")
    assert apply_action(frozenset({lit("x")}), noop) == frozenset({lit("x")})
    a = ActionModel(name="a", add=frozenset({lit("y")}), delete=frozenset({lit("z")}))
    assert apply_action(frozenset(), a) == frozenset({lit("y")})


def test_apply_action_idempotent_after_first_application():
    a = ActionModel(
        name="a",
        pre=frozenset({lit("p")}),
        add=frozenset({lit("q")}),
        delete=frozenset({lit("r")}),
    )
    s1 = apply_action(frozenset({lit("p"), lit("r")}), a)
    assert apply_action(s1, a) == s1


def test_holds():
    assert holds(frozenset(), frozenset())
    s = frozenset({lit("IsOpen", "d"), lit("Near", "p")})
    assert holds(frozenset({lit("IsOpen", "d")}), s)
    assert not holds(frozenset({lit("IsOpen", "d"), lit("Near", "q")}), s)


def test_validate_action_model():
    ok = ActionModel(
        name="Open",
        pre=frozenset({lit("IsClose", "d")}),
        add=frozenset({lit("IsOpen", "d")}),
        delete=frozenset({lit("IsClose", "d")}),
    )
    assert validate_action_model(ok) == []
    bad_ad = ActionModel(name="b", add=frozenset({lit("x")}), delete=frozenset({lit("x")}))
    assert any("add/del" in v for v in validate_action_model(bad_ad))
    bad_ap = ActionModel(name="b", add=frozenset({lit("x")}), pre=frozenset({lit("x")}))
    assert any("add/pre" in v for v in validate_action_model(bad_ap))
    bad_dur = ActionModel(name="b", add=frozenset({lit("x")}), duration=0)
    assert any("duration" in v for v in validate_action_model(bad_dur))


def test_effect_postcondition_property():
    rng = random.Random(7)
    literals = [lit(f"p{i}") for i in range(8)]
    for _ in range(200):
        pre = frozenset(rng.sample(literals, rng.randint(0, 3)))
        add = frozenset(rng.sample([l for l in literals if l not in pre], 2))
        delete = frozenset(rng.sample([l for l in literals if l not in add], 2))
        a = ActionModel(name="a", pre=pre, add=add, delete=delete)
        assert validate_action_model(a) == []
        state = frozenset(rng.sample(literals, rng.randint(0, 8))) | pre
        out = apply_action(state, a)
        assert add <= out
        assert not (delete & out)


def test_sort_is_total_and_stable():
    rng = random.Random(3)
    literals = [
        lit(p, *args)
        for p in ("B", "A", "C")
        for args in ((), ("x",), ("x", "y"), ("a",))
    ]
    for _ in range(20):
        sample = rng.sample(literals, rng.randint(1, len(literals)))
        assert sort_literals(set(sample)) == sort_literals(set(reversed(sample)))
    assert sort_literals({lit("Near", "p"), lit("IsOpen", "d")}) == [
        lit("IsOpen", "d"),
        lit("Near", "p"),
    ]


def test_literal_space_masks_round_trip():
    literals = [lit("c"), lit("a"), lit("b", "1")]
    space = LiteralSpace(literals)
    assert space.all() == (lit("a"), lit("b", "1"), lit("c"))
    mask = space.mask([lit("c"), lit("a")])
    assert space.literals(mask) == (lit("a"), lit("c"))
    assert space.mask_known([lit("zz"), lit("a")]) == space.mask([lit("a")])
