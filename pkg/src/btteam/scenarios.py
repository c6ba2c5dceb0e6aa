"""Seeded generators for solvable multi-robot instances.

Both generators build the goal from a legal multi-robot action walk, so every
instance carries a witness plan and solvability never depends on the planner.
Navigation actions are universal; manipulation capabilities are allocated by
the homogeneity parameter as per-object bundles, which keeps every generated
goal team-achievable at any homogeneity level.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from typing import Optional

from .domain_io import Domain
from .grounding import ActionSchema, PredicateDef
from .world import ActionModel, Literal, ObjectDef, Problem, apply_action, lit

WAREHOUSE = "warehouse"
HOME = "home"


@dataclass(frozen=True)
class ScenarioParams:
    domain: str = WAREHOUSE
    robots: int = 4
    alpha: float = 0.5
    seed: int = 0
    rooms: int = 4
    packages: int = 3
    closed_doors: int = 1
    grabbables: int = 5
    surfaces: int = 3
    containers: int = 2
    switches: int = 2
    goal_min: int = 1
    goal_max: int = 3
    use_printed_alpha_formula: bool = False


@dataclass(frozen=True)
class GeneratedInstance:
    problem: Problem
    witness: tuple[tuple[int, ActionModel], ...]
    domain: Optional[Domain] = None


class GenerationError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Allocation


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def redundancy_count(n: int, alpha: float, m: int = 0, printed_formula: bool = False) -> int:
    """Extra robots per action: 0 at full heterogeneity, n-1 at none.

    The printed form int(m * alpha) is kept behind a flag for comparison; it
    conflicts dimensionally and directionally with the stated endpoints, so
    the default derives redundancy from (n-1)(1-alpha).
    """
    if printed_formula:
        return max(0, min(n - 1, int(m * alpha)))
    return max(0, min(n - 1, _round_half_up((n - 1) * (1.0 - alpha))))


def allocate_groups(groups, n: int, alpha: float, rng: random.Random,
                    printed_formula: bool = False) -> list[list[int]]:
    """Owner lists per group: one uniformly random owner plus k extras.

    Extras are a prefix of a per-group random permutation, so lowering alpha
    (raising k) only ever widens each group's owner set for a fixed seed
    stream.
    """
    k = redundancy_count(n, alpha, m=len(groups), printed_formula=printed_formula)
    owners = []
    for _ in groups:
        order = list(range(n))
        rng.shuffle(order)
        owners.append(sorted(order[: 1 + k]))
    return owners


def allocate_actions(actions, n: int, alpha: float, seed: int,
                     printed_formula: bool = False) -> list[list[ActionModel]]:
    """Assign each action to 1 + k robots; union of spaces covers the input."""
    rng = random.Random(seed)
    actions = list(actions)
    owners = allocate_groups([[a] for a in actions], n, alpha, rng, printed_formula)
    spaces: list[list[ActionModel]] = [[] for _ in range(n)]
    for action, robot_ids in zip(actions, owners):
        for i in robot_ids:
            spaces[i].append(action)
    return spaces


# ---------------------------------------------------------------------------
# Warehouse


def _warehouse_actions(robot: str, rooms, doors, movables, keys_of_doors):
    """All ground warehouse actions for one robot, keyed by capability.

    'nav' is universal; 'transport:<pkg>' and 'toggle:<door>' are the
    allocatable bundles. Toggling binds the door's own key.
    """
    defs: dict[str, list[ActionModel]] = {"nav": []}
    gotoable = list(movables) + [d for d, _pair in doors]
    for room in rooms:
        for x in gotoable:
            defs["nav"].append(
                ActionModel(
                    name="GoToInRoom",
                    args=(x, room),
                    pre=frozenset({lit("IsInRoom", robot, room), lit("IsInRoom", x, room)}),
                    add=frozenset({lit("IsNear", robot, x)}),
                )
            )
    for door, (ra, rb) in doors:
        for src, dst in ((ra, rb), (rb, ra)):
            defs["nav"].append(
                ActionModel(
                    name="GoBtwRoom",
                    args=(src, dst),
                    pre=frozenset({lit("IsInRoom", robot, src), lit("IsOpen", door)}),
                    add=frozenset({lit("IsInRoom", robot, dst)}),
                    delete=frozenset({lit("IsInRoom", robot, src)}),
                )
            )
    for x in movables:
        pick = ActionModel(
            name="PickUp",
            args=(x,),
            pre=frozenset({lit("IsNear", robot, x), lit("IsHandEmpty", robot)}),
            add=frozenset({lit("IsHolding", robot, x)}),
            delete=frozenset({lit("IsHandEmpty", robot)}),
        )
        puts = [
            ActionModel(
                name="PutInRoom",
                args=(x, room),
                pre=frozenset({lit("IsHolding", robot, x), lit("IsInRoom", robot, room)}),
                add=frozenset({lit("IsInRoom", x, room), lit("IsHandEmpty", robot)}),
                delete=frozenset({lit("IsHolding", robot, x)}),
            )
            for room in rooms
        ]
        key = "transport:" + x
        defs[key] = [pick, *puts]
    for door, _pair in doors:
        key_obj = keys_of_doors.get(door)
        if key_obj is None:
            continue
        defs["toggle:" + door] = [
            ActionModel(
                name="Toggle",
                args=(door,),
                pre=frozenset(
                    {
                        lit("IsNear", robot, door),
                        lit("IsClose", door),
                        lit("IsHolding", robot, key_obj),
                    }
                ),
                add=frozenset({lit("IsOpen", door)}),
                delete=frozenset({lit("IsClose", door)}),
            )
        ]
    return defs


def warehouse_domain() -> Domain:
    """Schema-level description used for prompt rendering and file output."""
    return Domain(
        predicates=(
            PredicateDef("IsInRoom", 2, ("MOVABLE", "ROOM")),
            PredicateDef("IsNear", 2, ("ROBOT", "MOVABLE")),
            PredicateDef("IsHandEmpty", 1, ("ROBOT",)),
            PredicateDef("IsHolding", 2, ("ROBOT", "MOVABLE")),
            PredicateDef("IsOpen", 1, ("DOOR",)),
            PredicateDef("IsClose", 1, ("DOOR",)),
        ),
        schemas=(
            ActionSchema("GoToInRoom", ("GOTOABLE", "ROOM")),
            ActionSchema("GoBtwRoom", ("ROOM", "ROOM")),
            ActionSchema("PickUp", ("MOVABLE",)),
            ActionSchema("PutInRoom", ("MOVABLE", "ROOM")),
            ActionSchema("Toggle", ("DOOR",)),
        ),
    )


def gen_warehouse(params: ScenarioParams) -> GeneratedInstance:
    """Rooms on a line, lockable doors with matching keys, package goals."""
    rng = random.Random(params.seed)
    n = params.robots
    n_rooms = max(2, params.rooms)
    rooms = [f"room-{i}" for i in range(n_rooms)]
    doors = [(f"door-{i}", (rooms[i], rooms[i + 1])) for i in range(n_rooms - 1)]
    packages = [f"pkg-{i}" for i in range(max(1, params.packages))]

    closed_count = min(params.closed_doors, len(doors))
    closed_idx = sorted(rng.sample(range(len(doors)), closed_count))
    keys_of_doors = {doors[i][0]: f"key-{i}" for i in closed_idx}
    keys = [keys_of_doors[doors[i][0]] for i in closed_idx]
    movables = packages + keys

    leftmost_closed = closed_idx[0] if closed_idx else n_rooms - 1
    robot_rooms = [rng.randrange(0, leftmost_closed + 1) for _ in range(n)]
    key_rooms = {keys_of_doors[doors[i][0]]: rng.randrange(0, i + 1) for i in closed_idx}
    package_rooms = {p: rng.randrange(0, n_rooms) for p in packages}

    # Initial state: placements, closed/open doors, empty hands.
    robot_names = tuple(f"robot-{i}" for i in range(n))
    init = set()
    for i, name in enumerate(robot_names):
        init.add(lit("IsInRoom", name, rooms[robot_rooms[i]]))
        init.add(lit("IsHandEmpty", name))
    for p, ri in package_rooms.items():
        init.add(lit("IsInRoom", p, rooms[ri]))
    for key, ri in key_rooms.items():
        init.add(lit("IsInRoom", key, rooms[ri]))
    for i, (door, (ra, rb)) in enumerate(doors):
        init.add(lit("IsInRoom", door, ra))
        init.add(lit("IsInRoom", door, rb))
        init.add(lit("IsClose", door) if i in closed_idx else lit("IsOpen", door))

    # Per-robot ground actions and capability allocation.
    per_robot = [
        _warehouse_actions(robot_names[i], rooms, doors, movables, keys_of_doors)
        for i in range(n)
    ]
    capability_names = sorted(k for k in per_robot[0] if k != "nav")
    owner_lists = allocate_groups(
        capability_names, n, params.alpha, rng, params.use_printed_alpha_formula
    )
    owners = dict(zip(capability_names, owner_lists))
    spaces: list[list[ActionModel]] = []
    for i in range(n):
        space = list(per_robot[i]["nav"])
        for cap in capability_names:
            if i in owners[cap]:
                space.extend(per_robot[i][cap])
        spaces.append(space)
    index = [{(a.name, a.args): a for a in space} for space in spaces]

    # Witness: open closed doors left to right, then move goal packages.
    state = frozenset(init)
    witness: list[tuple[int, ActionModel]] = []
    where = {robot_names[i]: robot_rooms[i] for i in range(n)}

    def do(robot: int, name: str, *args: str):
        nonlocal state
        action = index[robot][(name, tuple(args))]
        if not action.pre <= state:
            raise GenerationError(f"witness precondition failed for {action}")
        state = apply_action(state, action)
        witness.append((robot, action))

    def move_to(robot: int, target: int):
        rname = robot_names[robot]
        while where[rname] != target:
            step = 1 if target > where[rname] else -1
            src, dst = where[rname], where[rname] + step
            do(robot, "GoBtwRoom", rooms[src], rooms[dst])
            where[rname] = dst

    for i in closed_idx:
        door = doors[i][0]
        key = keys_of_doors[door]
        opener = rng.choice(owners["toggle:" + door])
        move_to(opener, key_rooms[key])
        do(opener, "GoToInRoom", key, rooms[key_rooms[key]])
        do(opener, "PickUp", key)
        move_to(opener, i)
        do(opener, "GoToInRoom", door, rooms[i])
        do(opener, "Toggle", door)
        do(opener, "PutInRoom", key, rooms[i])

    goal_count = rng.randint(params.goal_min, min(params.goal_max, len(packages)))
    goal_packages = rng.sample(packages, goal_count)
    goal = set()
    for p in goal_packages:
        target = rng.randrange(0, n_rooms)
        mover = rng.choice(owners["transport:" + p])
        move_to(mover, package_rooms[p])
        do(mover, "GoToInRoom", p, rooms[package_rooms[p]])
        do(mover, "PickUp", p)
        move_to(mover, target)
        do(mover, "PutInRoom", p, rooms[target])
        goal.add(lit("IsInRoom", p, rooms[target]))

    if not goal <= state:
        raise GenerationError("witness walk did not establish the goal")

    objects = tuple(
        [ObjectDef(r, ("ROOM",)) for r in rooms]
        + [ObjectDef(d, ("DOOR", "GOTOABLE")) for d, _ in doors]
        + [ObjectDef(p, ("MOVABLE", "GOTOABLE")) for p in packages]
        + [ObjectDef(k, ("MOVABLE", "GOTOABLE", "KEY")) for k in keys]
    )
    problem = Problem(
        robots=n,
        action_spaces=tuple(tuple(s) for s in spaces),
        init=frozenset(init),
        goal=frozenset(goal),
        objects=objects,
        robot_names=robot_names,
    )
    return GeneratedInstance(problem, tuple(witness), warehouse_domain())


# ---------------------------------------------------------------------------
# Home service

_GRAB_CATALOG = ["mug", "book", "remote", "apple", "plate", "bottle", "towel", "toy"]
_SURFACE_CATALOG = ["table", "desk", "nightstand", "counter"]
_CONTAINER_CATALOG = ["fridge", "drawer", "cabinet", "box"]
_SWITCH_CATALOG = ["tablelamp", "tv", "fan", "radio"]

# Goal-category weights: door states, switch states, containment, placement.
GOAL_WEIGHTS = (
    ("open_close", 0.119),
    ("switch", 0.195),
    ("in", 0.270),
    ("on", 0.416),
)


def sample_goal_category(rng: random.Random) -> str:
    roll = rng.random()
    acc = 0.0
    for name, weight in GOAL_WEIGHTS:
        acc += weight
        if roll < acc:
            return name
    return GOAL_WEIGHTS[-1][0]


def home_domain() -> Domain:
    hands = lambda side: f"Is{side}HandEmpty(self)"
    hold = lambda side: f"Is{side}Holding(self,{{0}})"
    schemas = [ActionSchema("Walk", ("ALL",), add=("IsNear(self,{0})",))]
    for side in ("Left", "Right"):
        schemas.append(
            ActionSchema(
                f"{side}Grab",
                ("GRABBABLE", "SURFACES"),
                pre=("IsNear(self,{0})", "IsOn({0},{1})", hands(side)),
                add=(hold(side),),
                delete=("IsOn({0},{1})", hands(side)),
            )
        )
        schemas.append(
            ActionSchema(
                f"{side}GrabFrom",
                ("GRABBABLE", "CONTAINERS"),
                pre=("IsNear(self,{1})", "IsIn({0},{1})", "IsOpen({1})", hands(side)),
                add=(hold(side),),
                delete=("IsIn({0},{1})", hands(side)),
            )
        )
        schemas.append(
            ActionSchema(
                f"{side}Put",
                ("GRABBABLE", "SURFACES"),
                pre=(hold(side), "IsNear(self,{1})"),
                add=("IsOn({0},{1})", hands(side)),
                delete=(hold(side),),
            )
        )
        schemas.append(
            ActionSchema(
                f"{side}PutIn",
                ("GRABBABLE", "CONTAINERS"),
                pre=(hold(side), "IsNear(self,{1})", "IsOpen({1})"),
                add=("IsIn({0},{1})", hands(side)),
                delete=(hold(side),),
            )
        )
    schemas += [
        ActionSchema(
            "Open",
            ("CAN_OPEN",),
            pre=("IsNear(self,{0})", "IsClose({0})", "IsRightHandEmpty(self)"),
            add=("IsOpen({0})",),
            delete=("IsClose({0})",),
        ),
        ActionSchema(
            "Close",
            ("CAN_OPEN",),
            pre=("IsNear(self,{0})", "IsOpen({0})", "IsRightHandEmpty(self)"),
            add=("IsClose({0})",),
            delete=("IsOpen({0})",),
        ),
        ActionSchema(
            "SwitchOn",
            ("HAS_SWITCH",),
            pre=("IsNear(self,{0})", "IsSwitchedOff({0})", "IsRightHandEmpty(self)"),
            add=("IsSwitchedOn({0})",),
            delete=("IsSwitchedOff({0})",),
        ),
        ActionSchema(
            "SwitchOff",
            ("HAS_SWITCH",),
            pre=("IsNear(self,{0})", "IsSwitchedOn({0})", "IsRightHandEmpty(self)"),
            add=("IsSwitchedOff({0})",),
            delete=("IsSwitchedOn({0})",),
        ),
    ]
    predicates = (
        PredicateDef("IsNear", 2, ("ROBOT", "ALL")),
        PredicateDef("IsOn", 2, ("GRABBABLE", "SURFACES")),
        PredicateDef("IsIn", 2, ("GRABBABLE", "CONTAINERS")),
        PredicateDef("IsOpen", 1, ("CAN_OPEN",)),
        PredicateDef("IsClose", 1, ("CAN_OPEN",)),
        PredicateDef("IsSwitchedOn", 1, ("HAS_SWITCH",)),
        PredicateDef("IsSwitchedOff", 1, ("HAS_SWITCH",)),
        PredicateDef("IsLeftHandEmpty", 1, ("ROBOT",)),
        PredicateDef("IsRightHandEmpty", 1, ("ROBOT",)),
        PredicateDef("IsLeftHolding", 2, ("ROBOT", "GRABBABLE")),
        PredicateDef("IsRightHolding", 2, ("ROBOT", "GRABBABLE")),
    )
    return Domain(predicates=predicates, schemas=tuple(schemas))


def _home_actions(robot: str, grabs, surfaces, containers, switches):
    """Ground home actions for one robot, keyed by capability bundle."""
    defs: dict[str, list[ActionModel]] = {"nav": []}
    everything = grabs + surfaces + containers + switches
    for x in everything:
        defs["nav"].append(
            ActionModel(
                name="Walk",
                args=(x,),
                pre=frozenset(),
                add=frozenset({lit("IsNear", robot, x)}),
            )
        )
    for g in grabs:
        bundle = []
        for side in ("Left", "Right"):
            empty = lit(f"Is{side}HandEmpty", robot)
            holding = lit(f"Is{side}Holding", robot, g)
            for s in surfaces:
                bundle.append(
                    ActionModel(
                        name=f"{side}Grab",
                        args=(g, s),
                        pre=frozenset({lit("IsNear", robot, g), lit("IsOn", g, s), empty}),
                        add=frozenset({holding}),
                        delete=frozenset({lit("IsOn", g, s), empty}),
                    )
                )
                bundle.append(
                    ActionModel(
                        name=f"{side}Put",
                        args=(g, s),
                        pre=frozenset({holding, lit("IsNear", robot, s)}),
                        add=frozenset({lit("IsOn", g, s), empty}),
                        delete=frozenset({holding}),
                    )
                )
            for c in containers:
                bundle.append(
                    ActionModel(
                        name=f"{side}GrabFrom",
                        args=(g, c),
                        pre=frozenset(
                            {lit("IsNear", robot, c), lit("IsIn", g, c), lit("IsOpen", c), empty}
                        ),
                        add=frozenset({holding}),
                        delete=frozenset({lit("IsIn", g, c), empty}),
                    )
                )
                bundle.append(
                    ActionModel(
                        name=f"{side}PutIn",
                        args=(g, c),
                        pre=frozenset({holding, lit("IsNear", robot, c), lit("IsOpen", c)}),
                        add=frozenset({lit("IsIn", g, c), empty}),
                        delete=frozenset({holding}),
                    )
                )
        defs["place:" + g] = bundle
    for c in containers:
        defs["operate:" + c] = [
            ActionModel(
                name="Open",
                args=(c,),
                pre=frozenset(
                    {lit("IsNear", robot, c), lit("IsClose", c), lit("IsRightHandEmpty", robot)}
                ),
                add=frozenset({lit("IsOpen", c)}),
                delete=frozenset({lit("IsClose", c)}),
            ),
            ActionModel(
                name="Close",
                args=(c,),
                pre=frozenset(
                    {lit("IsNear", robot, c), lit("IsOpen", c), lit("IsRightHandEmpty", robot)}
                ),
                add=frozenset({lit("IsClose", c)}),
                delete=frozenset({lit("IsOpen", c)}),
            ),
        ]
    for d in switches:
        defs["switch:" + d] = [
            ActionModel(
                name="SwitchOn",
                args=(d,),
                pre=frozenset(
                    {lit("IsNear", robot, d), lit("IsSwitchedOff", d), lit("IsRightHandEmpty", robot)}
                ),
                add=frozenset({lit("IsSwitchedOn", d)}),
                delete=frozenset({lit("IsSwitchedOff", d)}),
            ),
            ActionModel(
                name="SwitchOff",
                args=(d,),
                pre=frozenset(
                    {lit("IsNear", robot, d), lit("IsSwitchedOn", d), lit("IsRightHandEmpty", robot)}
                ),
                add=frozenset({lit("IsSwitchedOff", d)}),
                delete=frozenset({lit("IsSwitchedOn", d)}),
            ),
        ]
    return defs


def gen_home(params: ScenarioParams) -> GeneratedInstance:
    """Household objects, two-hand grab semantics, distribution-matched goals."""
    rng = random.Random(params.seed)
    n = params.robots
    grabs = _GRAB_CATALOG[: max(1, params.grabbables)]
    surfaces = _SURFACE_CATALOG[: max(1, params.surfaces)]
    containers = _CONTAINER_CATALOG[: max(1, params.containers)]
    switches = _SWITCH_CATALOG[: max(1, params.switches)]
    robot_names = tuple(f"robot-{i}" for i in range(n))

    placement: dict[str, Literal] = {}
    init = set()
    for g in grabs:
        if rng.random() < 0.6 or not containers:
            placement[g] = lit("IsOn", g, rng.choice(surfaces))
        else:
            placement[g] = lit("IsIn", g, rng.choice(containers))
        init.add(placement[g])
    door_state = {}
    for c in containers:
        door_state[c] = "IsClose" if rng.random() < 0.6 else "IsOpen"
        init.add(lit(door_state[c], c))
    switch_state = {}
    for d in switches:
        switch_state[d] = "IsSwitchedOff" if rng.random() < 0.7 else "IsSwitchedOn"
        init.add(lit(switch_state[d], d))
    for name in robot_names:
        init.add(lit("IsLeftHandEmpty", name))
        init.add(lit("IsRightHandEmpty", name))

    per_robot = [
        _home_actions(robot_names[i], grabs, surfaces, containers, switches)
        for i in range(n)
    ]
    capability_names = sorted(k for k in per_robot[0] if k != "nav")
    owner_lists = allocate_groups(
        capability_names, n, params.alpha, rng, params.use_printed_alpha_formula
    )
    owners = dict(zip(capability_names, owner_lists))
    spaces: list[list[ActionModel]] = []
    for i in range(n):
        space = list(per_robot[i]["nav"])
        for cap in capability_names:
            if i in owners[cap]:
                space.extend(per_robot[i][cap])
        spaces.append(space)
    index = [{(a.name, a.args): a for a in space} for space in spaces]

    state = frozenset(init)
    witness: list[tuple[int, ActionModel]] = []

    def do(robot: int, name: str, *args: str):
        nonlocal state
        action = index[robot][(name, tuple(args))]
        if not action.pre <= state:
            raise GenerationError(f"witness precondition failed for {action}")
        state = apply_action(state, action)
        witness.append((robot, action))

    def ensure_open(c: str):
        if lit("IsOpen", c) in state:
            return
        opener = rng.choice(owners["operate:" + c])
        do(opener, "Walk", c)
        do(opener, "Open", c)

    def carry(g: str, drop_name: str, *drop_args: str):
        mover = rng.choice(owners["place:" + g])
        here = min(
            l for l in state if l.predicate in ("IsOn", "IsIn") and l.args[0] == g
        )
        if here.predicate == "IsIn":
            ensure_open(here.args[1])
            do(mover, "Walk", here.args[1])
            do(mover, "LeftGrabFrom", g, here.args[1])
        else:
            do(mover, "Walk", g)
            do(mover, "LeftGrab", g, here.args[1])
        do(mover, "Walk", drop_args[-1])
        do(mover, drop_name, *drop_args)

    # Sample goal literals per the category distribution; containment and
    # placement chains run before door/switch state chains so closing a
    # container cannot undo an earlier put.
    goal_count = rng.randint(params.goal_min, params.goal_max)
    goal: set[Literal] = set()
    used_objects: set[str] = set()
    placement_goals: list[Literal] = []
    state_goals: list[Literal] = []
    attempts = 0
    while len(placement_goals) + len(state_goals) < goal_count and attempts < 50:
        attempts += 1
        category = sample_goal_category(rng)
        if category == "on":
            free = [g for g in grabs if g not in used_objects]
            if not free:
                continue
            g = rng.choice(free)
            target = lit("IsOn", g, rng.choice(surfaces))
            used_objects.add(g)
            placement_goals.append(target)
        elif category == "in":
            free = [g for g in grabs if g not in used_objects]
            if not free or not containers:
                continue
            g = rng.choice(free)
            target = lit("IsIn", g, rng.choice(containers))
            used_objects.add(g)
            placement_goals.append(target)
        elif category == "open_close":
            free = [c for c in containers if c not in used_objects]
            if not free:
                continue
            c = rng.choice(free)
            used_objects.add(c)
            state_goals.append(lit(rng.choice(("IsOpen", "IsClose")), c))
        else:
            free = [d for d in switches if d not in used_objects]
            if not free:
                continue
            d = rng.choice(free)
            used_objects.add(d)
            state_goals.append(lit(rng.choice(("IsSwitchedOn", "IsSwitchedOff")), d))

    for target in placement_goals:
        g, spot = target.args
        if target in state:
            goal.add(target)
            continue
        if target.predicate == "IsIn":
            ensure_open(spot)
            carry(g, "LeftPutIn", g, spot)
        else:
            carry(g, "LeftPut", g, spot)
        goal.add(target)
    for target in state_goals:
        obj = target.args[0]
        if target not in state:
            if target.predicate in ("IsOpen", "IsClose"):
                worker = rng.choice(owners["operate:" + obj])
                do(worker, "Walk", obj)
                do(worker, "Open" if target.predicate == "IsOpen" else "Close", obj)
            else:
                worker = rng.choice(owners["switch:" + obj])
                do(worker, "Walk", obj)
                do(worker, "SwitchOn" if target.predicate == "IsSwitchedOn" else "SwitchOff", obj)
        goal.add(target)

    if not goal:
        goal = {placement[grabs[0]]}
    if not goal <= state:
        raise GenerationError("witness walk did not establish the goal")

    objects = tuple(
        [ObjectDef(g, ("GRABBABLE", "ALL")) for g in grabs]
        + [ObjectDef(s, ("SURFACES", "ALL")) for s in surfaces]
        + [ObjectDef(c, ("CONTAINERS", "CAN_OPEN", "ALL")) for c in containers]
        + [ObjectDef(d, ("HAS_SWITCH", "ALL")) for d in switches]
    )
    problem = Problem(
        robots=n,
        action_spaces=tuple(tuple(s) for s in spaces),
        init=frozenset(init),
        goal=frozenset(goal),
        objects=objects,
        robot_names=robot_names,
    )
    return GeneratedInstance(problem, tuple(witness), home_domain())


def generate(params: ScenarioParams) -> GeneratedInstance:
    if params.domain == WAREHOUSE:
        return gen_warehouse(params)
    if params.domain == HOME:
        return gen_home(params)
    raise ValueError(f"unknown scenario domain {params.domain!r}")


def witness_sequences(instance: GeneratedInstance, max_len: int = 5):
    """Per-robot macro proposals derived from the witness plan.

    Consecutive same-robot runs become candidate sequences, truncated to the
    proposal size limit; used for offline macro experiments.
    """
    n = instance.problem.robots
    runs: list[list] = []
    for robot, action in instance.witness:
        if runs and runs[-1][0] == robot and len(runs[-1][1]) < max_len:
            runs[-1][1].append(action)
        else:
            runs.append([robot, [action]])
    proposals: list[dict] = [dict() for _ in range(n)]
    for robot, actions in runs:
        if len(actions) < 2 or len(proposals[robot]) >= 5:
            continue
        name = f"seq_{len(proposals[robot])}_" + actions[-1].name.lower()
        proposals[robot][name] = tuple(actions)
    return proposals


# ---------------------------------------------------------------------------
# Small abstract instances for oracle comparisons


def gen_abstract(
    seed: int,
    n_literals: int = 8,
    n_actions: int = 10,
    robots: int = 2,
    corrupt: bool = False,
) -> Problem:
    """Random small instance; goal taken from a forward walk unless corrupted
    with a literal nothing can add (provably unsolvable)."""
    rng = random.Random(seed)
    literals = [lit(f"p{i}") for i in range(n_literals)]
    actions = []
    for i in range(n_actions):
        pre = frozenset(rng.sample(literals, rng.randint(0, 2)))
        remaining = [l for l in literals if l not in pre]
        add = frozenset(rng.sample(remaining, rng.randint(1, min(2, len(remaining)))))
        deletable = [l for l in literals if l not in add]
        delete = frozenset(rng.sample(deletable, rng.randint(0, min(2, len(deletable)))))
        actions.append(ActionModel(name=f"a{i}", pre=pre, add=add, delete=delete))
    init = frozenset(rng.sample(literals, rng.randint(1, max(1, n_literals // 2))))
    state = init
    for _ in range(rng.randint(1, 6)):
        applicable = [a for a in actions if a.pre <= state]
        if not applicable:
            break
        state = apply_action(state, rng.choice(applicable))
    pool = sorted(state)
    goal = frozenset(rng.sample(pool, rng.randint(1, min(3, len(pool)))))
    if corrupt:
        goal = goal | {lit("never")}
    spaces = allocate_actions(actions, robots, alpha=rng.random(), seed=rng.randrange(2**30))
    # Every robot needs a nonempty space for the planner loop; give robot 0
    # everything unassigned robots would otherwise lose.
    for space in spaces:
        if not space:
            space.append(actions[0])
    return Problem(
        robots=robots,
        action_spaces=tuple(tuple(s) for s in spaces),
        init=init,
        goal=goal,
    )
