"""Perception snapshot, the agent interface and the simple agents."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Sequence

from ..dynamics import FlightCommand, PerformanceLimits
from ..geometry import RelativeGeometry
from ..state import EntityState, wrap_angle


class AgentError(RuntimeError):
    """An agent could not produce a decision."""


class MissingTargetError(AgentError):
    pass


class Perception(NamedTuple):
    """Immutable snapshot handed to an agent at a decision tick.

    ``geometry`` and ``target`` are present only when the designated target
    is among the sensed contacts.
    """

    own: EntityState
    time: float
    contacts: tuple[tuple[str, EntityState], ...] = ()
    target_id: str | None = None
    target: EntityState | None = None
    geometry: RelativeGeometry | None = None
    limits: PerformanceLimits = PerformanceLimits()

    def require_target(self) -> tuple[EntityState, RelativeGeometry]:
        if self.target is None or self.geometry is None:
            raise MissingTargetError(f"no contact for target {self.target_id!r}")
        return self.target, self.geometry


class Agent:
    """Base class. Subclasses implement :meth:`decide`.

    ``label`` is the coarse agent state written to the trace and ``node`` the
    active FSM state or behaviour-tree path. ``memory``/``restore`` expose the
    internal state as plain data so a simulation can be snapshotted.
    """

    kind = "agent"

    def decide(self, p: Perception) -> FlightCommand:
        raise NotImplementedError

    @property
    def label(self) -> str:
        return ""

    @property
    def node(self) -> str:
        return ""

    def memory(self) -> dict[str, Any]:
        return {}

    def restore(self, memory: dict[str, Any]) -> None:
        pass


def pure_pursuit_heading(own: EntityState, target: EntityState) -> float:
    return math.atan2(target.y - own.y, target.x - own.x)


class StraightAndLevel(Agent):
    """Holds a fixed heading, altitude and speed (initial values unless given)."""

    kind = "straight_and_level"

    def __init__(self, heading: float | None = None, altitude: float | None = None, speed: float | None = None):
        self.heading = heading
        self.altitude = altitude
        self.speed = speed

    def decide(self, p: Perception) -> FlightCommand:
        if self.heading is None:
            self.heading = p.own.heading
        if self.altitude is None:
            self.altitude = p.own.z
        if self.speed is None:
            self.speed = p.own.speed
        return FlightCommand(self.heading, self.altitude, self.speed)

    @property
    def label(self) -> str:
        return "Cruise"

    @property
    def node(self) -> str:
        return "Cruise"

    def memory(self) -> dict[str, Any]:
        return {"heading": self.heading, "altitude": self.altitude, "speed": self.speed}

    def restore(self, memory: dict[str, Any]) -> None:
        self.heading = memory["heading"]
        self.altitude = memory["altitude"]
        self.speed = memory["speed"]


class WaypointAgent(Agent):
    """Flies a list of (x, y, z) waypoints, switching within ``capture_radius`` (horizontal)."""

    kind = "waypoint"

    def __init__(
        self,
        waypoints: Sequence[Sequence[float]],
        speed: float = 200.0,
        capture_radius: float = 500.0,
        loop: bool = False,
    ):
        if not waypoints:
            raise ValueError("waypoint agent needs at least one waypoint")
        self.waypoints = [tuple(float(c) for c in w) for w in waypoints]
        if any(len(w) != 3 for w in self.waypoints):
            raise ValueError("waypoints must be (x, y, z) triples")
        self.speed = speed
        self.capture_radius = capture_radius
        self.loop = loop
        self.index = 0

    def decide(self, p: Perception) -> FlightCommand:
        own = p.own
        n = len(self.waypoints)
        # advance past every waypoint already inside the capture radius
        for _ in range(n):
            wx, wy, _wz = self.waypoints[self.index]
            if math.hypot(wx - own.x, wy - own.y) > self.capture_radius:
                break
            if self.index + 1 < n:
                self.index += 1
            elif self.loop:
                self.index = 0
            else:
                break
        wx, wy, wz = self.waypoints[self.index]
        if math.hypot(wx - own.x, wy - own.y) == 0.0:
            heading = own.heading
        else:
            heading = math.atan2(wy - own.y, wx - own.x)
        return FlightCommand(heading, wz, self.speed)

    @property
    def label(self) -> str:
        return f"wp{self.index}"

    @property
    def node(self) -> str:
        return f"FlyTo[{self.index}]"

    def memory(self) -> dict[str, Any]:
        return {"index": self.index}

    def restore(self, memory: dict[str, Any]) -> None:
        self.index = int(memory["index"])


class LowLevelAction(str, enum.Enum):
    TURN_LEFT = "TurnLeft"
    TURN_RIGHT = "TurnRight"
    SPEED_UP = "SpeedUp"
    SLOW_DOWN = "SlowDown"
    CLIMB_UP = "ClimbUp"
    CLIMB_DOWN = "ClimbDown"
    HOLD = "Hold"


@dataclass(frozen=True)
class ActionQuanta:
    heading: float = math.radians(10.0)
    speed: float = 10.0
    altitude: float = 100.0


def low_level_apply(
    action: LowLevelAction | str,
    own: EntityState,
    quanta: ActionQuanta = ActionQuanta(),
    limits: PerformanceLimits = PerformanceLimits(),
) -> FlightCommand:
    """Map one discrete action onto set-points relative to the current state."""
    a = LowLevelAction(action)
    heading, altitude, speed = own.heading, own.z, own.speed
    if a is LowLevelAction.TURN_LEFT:
        heading += quanta.heading
    elif a is LowLevelAction.TURN_RIGHT:
        heading -= quanta.heading
    elif a is LowLevelAction.SPEED_UP:
        speed += quanta.speed
    elif a is LowLevelAction.SLOW_DOWN:
        speed -= quanta.speed
    elif a is LowLevelAction.CLIMB_UP:
        altitude += quanta.altitude
    elif a is LowLevelAction.CLIMB_DOWN:
        altitude = max(0.0, altitude - quanta.altitude)
    speed = min(max(speed, limits.v_min), limits.v_max)
    return FlightCommand(wrap_angle(heading), altitude, speed)


class LowLevelScriptAgent(Agent):
    """Replays a fixed list of low-level actions, one per decision; Hold once exhausted."""

    kind = "low_level_script"

    def __init__(self, script: Sequence[LowLevelAction | str], quanta: ActionQuanta = ActionQuanta(), loop: bool = False):
        self.script = [LowLevelAction(a) for a in script]
        self.quanta = quanta
        self.loop = loop
        self.index = 0
        self.last = LowLevelAction.HOLD

    def decide(self, p: Perception) -> FlightCommand:
        if self.script and (self.index < len(self.script) or self.loop):
            self.last = self.script[self.index % len(self.script)]
            self.index += 1
        else:
            self.last = LowLevelAction.HOLD
        return low_level_apply(self.last, p.own, self.quanta, p.limits)

    @property
    def label(self) -> str:
        return self.last.value

    @property
    def node(self) -> str:
        return self.last.value

    def memory(self) -> dict[str, Any]:
        return {"index": self.index, "last": self.last.value}

    def restore(self, memory: dict[str, Any]) -> None:
        self.index = int(memory["index"])
        self.last = LowLevelAction(memory["last"])
