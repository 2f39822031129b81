"""Stern-conversion intercept: tactical parameters, leaf behaviours and the FSM.

The manoeuvre runs through five phases::

    PurePursuit -> FlyRelativeBearing -> FlyingOffset -> Converting <-> Matching
                              \\________________________/^

Pure pursuit closes the range; inside ``r_conversion`` the aircraft cuts
away from the line of sight to build lateral room, parallels the target's
reciprocal course once ``d_offset`` is reached, turns in behind the target
at ``r_turn_in`` (or as soon as the target passes abeam) and finally holds a
trail station at ``r_station`` matching the target's speed.

The behaviour functions here are shared verbatim by :class:`FsmSternAgent`
and the behaviour-tree agent, so both express one policy.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, fields
from typing import Any

from ..dynamics import FlightCommand
from ..geometry import HALF_PI, RelativeGeometry, lateral_offset
from ..state import EntityState
from .base import Agent, Perception, pure_pursuit_heading


@dataclass(frozen=True)
class SternConversionParams:
    """Tactical parameters of the stern conversion; this is the evolvable genome."""

    r_conversion: float = 4000.0
    d_offset: float = 2000.0
    r_turn_in: float = 1500.0
    r_station: float = 500.0
    v_match_tol: float = 20.0
    capture_aa: float = math.radians(60.0)
    capture_ata: float = math.radians(30.0)

    def __post_init__(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{f.name} must be positive and finite, got {v!r}")
        if not self.r_turn_in < self.r_conversion:
            raise ValueError("r_turn_in must be below r_conversion")

    @classmethod
    def names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class PursuitSettings:
    """Non-evolved constants of the stern behaviours."""

    intercept_speed: float = 250.0
    cut_angle: float = math.radians(30.0)
    closure_gain: float = 0.04  # 1/s, trail-range error to closing speed

    def __post_init__(self) -> None:
        if not (self.intercept_speed > 0.0 and self.cut_angle > 0.0 and self.closure_gain > 0.0):
            raise ValueError("pursuit settings must be positive")


class SternPhase(str, enum.Enum):
    PURE_PURSUIT = "PurePursuit"
    FLY_RELATIVE_BEARING = "FlyRelativeBearing"
    FLYING_OFFSET = "FlyingOffset"
    CONVERTING = "Converting"
    MATCHING = "Matching"

    @property
    def rank(self) -> int:
        return _RANK[self]


_RANK = {p: i for i, p in enumerate(SternPhase)}


# -- guards ---------------------------------------------------------------

def in_conversion_range(g: RelativeGeometry, params: SternConversionParams) -> bool:
    return g.range <= params.r_conversion


def turn_in_due(g: RelativeGeometry, params: SternConversionParams) -> bool:
    # target passing abeam also forces the turn, otherwise a wide offset never reaches r_turn_in
    return g.range <= params.r_turn_in or abs(g.ata) > HALF_PI


def offset_built(own: EntityState, target: EntityState, params: SternConversionParams) -> bool:
    return lateral_offset(own, target) >= params.d_offset


def captured(g: RelativeGeometry, params: SternConversionParams) -> bool:
    return abs(g.aa) <= params.capture_aa and abs(g.ata) <= params.capture_ata


def capture_lost(g: RelativeGeometry, params: SternConversionParams) -> bool:
    return abs(g.aa) > 2.0 * params.capture_aa or abs(g.ata) > 2.0 * params.capture_ata


# -- behaviours -----------------------------------------------------------

def _trail_speed(target: EntityState, g: RelativeGeometry, params: SternConversionParams, s: PursuitSettings) -> float:
    return target.speed + max(-params.v_match_tol, s.closure_gain * (g.range - params.r_station))


def pure_pursuit(p: Perception, params: SternConversionParams, s: PursuitSettings) -> FlightCommand:
    target, _ = p.require_target()
    return FlightCommand(pure_pursuit_heading(p.own, target), target.z, s.intercept_speed)


def fly_relative_bearing(p: Perception, params: SternConversionParams, s: PursuitSettings) -> FlightCommand:
    target, g = p.require_target()
    side = 1.0 if g.ata >= 0.0 else -1.0
    # keep the target on the side it already is and open the angle by cut_angle
    heading = pure_pursuit_heading(p.own, target) + side * s.cut_angle
    return FlightCommand(heading, target.z, s.intercept_speed)


def fly_offset(p: Perception, params: SternConversionParams, s: PursuitSettings) -> FlightCommand:
    target, _ = p.require_target()
    return FlightCommand(target.heading + math.pi, target.z, s.intercept_speed)


def convert(p: Perception, params: SternConversionParams, s: PursuitSettings) -> FlightCommand:
    """Lag pursuit of the point ``r_station`` behind the target.

    While the target is still aft of the wing line the aircraft flies at the
    target's speed to keep the turn tight; after that it closes on the trail
    station.
    """
    target, g = p.require_target()
    speed = target.speed if abs(g.ata) > HALF_PI else _trail_speed(target, g, params, s)
    ax = target.x - params.r_station * math.cos(target.heading)
    ay = target.y - params.r_station * math.sin(target.heading)
    dx, dy = ax - p.own.x, ay - p.own.y
    heading = math.atan2(dy, dx) if (dx or dy) else pure_pursuit_heading(p.own, target)
    return FlightCommand(heading, target.z, speed)


def match_speed(p: Perception, params: SternConversionParams, s: PursuitSettings) -> FlightCommand:
    """Point at the target and close on the trail station at a speed near the target's."""
    target, g = p.require_target()
    return FlightCommand(pure_pursuit_heading(p.own, target), target.z, _trail_speed(target, g, params, s))


BEHAVIOURS = {
    SternPhase.PURE_PURSUIT: pure_pursuit,
    SternPhase.FLY_RELATIVE_BEARING: fly_relative_bearing,
    SternPhase.FLYING_OFFSET: fly_offset,
    SternPhase.CONVERTING: convert,
    SternPhase.MATCHING: match_speed,
}


# -- finite state machine -------------------------------------------------

def _next_phase(s: SternPhase, own: EntityState, target: EntityState, g: RelativeGeometry,
                params: SternConversionParams) -> SternPhase:
    if s is SternPhase.PURE_PURSUIT:
        return SternPhase.FLY_RELATIVE_BEARING if in_conversion_range(g, params) else s
    if s is SternPhase.FLY_RELATIVE_BEARING:
        if turn_in_due(g, params):
            return SternPhase.CONVERTING
        return SternPhase.FLYING_OFFSET if offset_built(own, target, params) else s
    if s is SternPhase.FLYING_OFFSET:
        return SternPhase.CONVERTING if turn_in_due(g, params) else s
    if s is SternPhase.CONVERTING:
        return SternPhase.MATCHING if captured(g, params) else s
    return SternPhase.CONVERTING if capture_lost(g, params) else s


_SETTLE_PASSES = range(len(SternPhase) + 1)


def fsm_step(
    s: SternPhase,
    p: Perception,
    params: SternConversionParams,
    settings: PursuitSettings = PursuitSettings(),
) -> tuple[SternPhase, FlightCommand]:
    """Fire every enabled transition, then emit the command of the settled state."""
    target, g = p.require_target()
    for _ in _SETTLE_PASSES:
        nxt = _next_phase(s, p.own, target, g, params)
        if nxt is s:
            break
        s = nxt
    return s, BEHAVIOURS[s](p, params, settings)


class FsmSternAgent(Agent):
    kind = "fsm_stern"

    def __init__(self, params: SternConversionParams = SternConversionParams(),
                 settings: PursuitSettings = PursuitSettings()):
        self.params = params
        self.settings = settings
        self.state = SternPhase.PURE_PURSUIT

    def decide(self, p: Perception) -> FlightCommand:
        self.state, cmd = fsm_step(self.state, p, self.params, self.settings)
        return cmd

    @property
    def label(self) -> str:
        return self.state.value

    @property
    def node(self) -> str:
        return self.state.value

    def memory(self) -> dict[str, Any]:
        return {"state": self.state.value}

    def restore(self, memory: dict[str, Any]) -> None:
        self.state = SternPhase(memory["state"])
