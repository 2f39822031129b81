"""Kinematic state of a single aircraft."""

from __future__ import annotations

import math
from typing import NamedTuple


def wrap_angle(angle: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    if -math.pi < angle <= math.pi:
        return angle
    a = math.fmod(angle + math.pi, 2.0 * math.pi)
    if a <= 0.0:
        a += 2.0 * math.pi
    return a - math.pi


class EntityState(NamedTuple):
    """Point-mass truth state.

    Positions are metres in an east/north/up frame. ``heading`` is measured
    counter-clockwise from +x (east); ``gamma`` is the flight-path angle and
    ``bank`` the bank angle, both radians. Positive bank turns the aircraft
    to the right, i.e. towards decreasing heading. A named tuple, because
    the engine builds one per entity per tick.
    """

    x: float
    y: float
    z: float
    heading: float
    speed: float
    gamma: float = 0.0
    bank: float = 0.0
    time: float = 0.0

    @property
    def position(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    def velocity_unit(self) -> tuple[float, float, float]:
        cg = math.cos(self.gamma)
        return (cg * math.cos(self.heading), cg * math.sin(self.heading), math.sin(self.gamma))

    def velocity(self) -> tuple[float, float, float]:
        ux, uy, uz = self.velocity_unit()
        return (self.speed * ux, self.speed * uy, self.speed * uz)

    def is_finite(self) -> bool:
        # any NaN or inf poisons the sum
        return math.isfinite(self.x + self.y + self.z + self.heading + self.speed + self.gamma + self.bank + self.time)

    def with_(self, **changes) -> "EntityState":
        return self._replace(**changes)
