"""Hand-built instances shared across the test modules."""

from __future__ import annotations

from btteam.domain_io import Domain
from btteam.scenarios import _warehouse_actions, warehouse_domain
from btteam.world import ActionModel, ObjectDef, Problem, lit


def w1_actions(open_duration: int = 1):
    """Door/package toy world: open the door, walk over, move the package."""
    open_door = ActionModel(
        name="Open",
        args=("door",),
        pre=frozenset({lit("IsClose", "door")}),
        add=frozenset({lit("IsOpen", "door")}),
        delete=frozenset({lit("IsClose", "door")}),
        duration=open_duration,
    )
    walk = ActionModel(
        name="Walk",
        args=("pkg",),
        pre=frozenset(),
        add=frozenset({lit("Near", "pkg")}),
    )
    move = ActionModel(
        name="Move",
        args=("pkg",),
        pre=frozenset({lit("IsOpen", "door"), lit("Near", "pkg")}),
        add=frozenset({lit("InTarget", "pkg")}),
    )
    return {"Open": open_door, "Walk": walk, "Move": move}


def w1_problem(robots: int = 1, open_duration: int = 1) -> Problem:
    actions = tuple(w1_actions(open_duration).values())
    return Problem(
        robots=robots,
        action_spaces=tuple(actions for _ in range(robots)),
        init=frozenset({lit("IsClose", "door")}),
        goal=frozenset({lit("InTarget", "pkg")}),
    )


def golden_door_problem() -> Problem:
    """The duplicated two-robot instance used for the intention-sharing
    golden trace: slow door opening, fast walking."""
    return w1_problem(robots=2, open_duration=3)


def fig_split_problem() -> Problem:
    """Heterogeneous pair: only cross-tree expansion can chain make/unload."""
    make = ActionModel(
        name="Make",
        args=("salad",),
        pre=frozenset({lit("Has", "fruit")}),
        add=frozenset({lit("Has", "salad")}),
    )
    unload = ActionModel(
        name="Unload",
        args=("fruit",),
        pre=frozenset({lit("In", "fruit", "package")}),
        add=frozenset({lit("Has", "fruit")}),
    )
    return Problem(
        robots=2,
        action_spaces=((make,), (unload,)),
        init=frozenset({lit("In", "fruit", "package")}),
        goal=frozenset({lit("Has", "salad")}),
    )


def keyball_problem() -> tuple[Problem, Domain]:
    """Two rooms, a locked door, a key, and a ball to relocate.

    Robot 0 can fetch the key and toggle the door but cannot change rooms;
    robot 1 can carry the ball between rooms but cannot toggle.
    """
    rooms = ["room-0", "room-1"]
    doors = [("door-0", ("room-0", "room-1"))]
    movables = ["ball-0", "key-0"]
    keys_of_doors = {"door-0": "key-0"}
    schemas_by_robot = [
        {"GoToInRoom", "PickUp", "PutInRoom", "Toggle"},
        {"GoToInRoom", "GoBtwRoom", "PickUp", "PutInRoom"},
    ]
    spaces = []
    for i, allowed in enumerate(schemas_by_robot):
        defs = _warehouse_actions(f"robot-{i}", rooms, doors, movables, keys_of_doors)
        space = [
            a
            for bucket in sorted(defs)
            for a in defs[bucket]
            if a.name in allowed
        ]
        spaces.append(tuple(space))
    init = frozenset(
        {
            lit("IsInRoom", "ball-0", "room-0"),
            lit("IsInRoom", "key-0", "room-0"),
            lit("IsClose", "door-0"),
            lit("IsInRoom", "door-0", "room-0"),
            lit("IsInRoom", "door-0", "room-1"),
            lit("IsInRoom", "robot-0", "room-0"),
            lit("IsInRoom", "robot-1", "room-0"),
            lit("IsHandEmpty", "robot-0"),
            lit("IsHandEmpty", "robot-1"),
        }
    )
    problem = Problem(
        robots=2,
        action_spaces=tuple(spaces),
        init=init,
        goal=frozenset({lit("IsInRoom", "ball-0", "room-1")}),
        objects=(
            ObjectDef("room-0", ("ROOM",)),
            ObjectDef("room-1", ("ROOM",)),
            ObjectDef("door-0", ("DOOR", "GOTOABLE")),
            ObjectDef("ball-0", ("MOVABLE", "GOTOABLE")),
            ObjectDef("key-0", ("MOVABLE", "GOTOABLE", "KEY")),
        ),
    )
    return problem, warehouse_domain()


def roa_departure_problem() -> Problem:
    """Two actions that are individually safe but jointly leave the region
    from which the trees can still succeed."""
    a1 = ActionModel(
        name="a1",
        pre=frozenset({lit("1"), lit("2")}),
        add=frozenset({lit("3")}),
        delete=frozenset({lit("1")}),
    )
    a2 = ActionModel(
        name="a2",
        pre=frozenset({lit("1"), lit("2")}),
        add=frozenset({lit("4")}),
        delete=frozenset({lit("2")}),
    )
    goal_a = ActionModel(
        name="finish1",
        pre=frozenset({lit("2"), lit("3")}),
        add=frozenset({lit("goal")}),
    )
    goal_b = ActionModel(
        name="finish2",
        pre=frozenset({lit("1"), lit("4")}),
        add=frozenset({lit("goal")}),
    )
    return Problem(
        robots=2,
        action_spaces=((a1, goal_a), (a2, goal_b)),
        init=frozenset({lit("1"), lit("2")}),
        goal=frozenset({lit("goal")}),
    )
