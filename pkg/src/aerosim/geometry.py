"""Relative-orientation features for an ordered pair of aircraft.

Angle conventions (all radians):

* ``ata`` (antenna train angle) is the angle at the observer between its own
  velocity vector and the line of sight to the target. 0 means dead ahead.
* ``aa`` (aspect angle) is the angle at the target between its tail and the
  line of sight back to the observer. 0 means the observer sits on the
  target's six o'clock.

Magnitudes are the full 3D angles between the unit vectors. Signs come from the
horizontal cross product: positive when the measured ray lies clockwise
(to the right, seen from above) of the reference direction, and ``+`` when
the two are exactly aligned or opposed. Scoring only uses magnitudes; the
signs exist so agents can pick a turn direction.
"""

from __future__ import annotations

import enum
import math
from typing import NamedTuple

from .state import EntityState, wrap_angle

HALF_PI = 0.5 * math.pi


class GeometryError(ValueError):
    """Relative geometry is undefined for the given pair of states."""


class RelativeGeometry(NamedTuple):
    ata: float
    aa: float
    range: float
    delta_v: float
    bearing: float

    @property
    def abs_ata(self) -> float:
        return abs(self.ata)

    @property
    def abs_aa(self) -> float:
        return abs(self.aa)


class OrientationCategory(str, enum.Enum):
    OFFENSIVE = "Offensive"
    DEFENSIVE = "Defensive"
    NEUTRAL = "Neutral"
    HEAD_ON = "HeadOn"


def _signed_angle(ax: float, ay: float, az: float, bx: float, by: float, bz: float) -> float:
    """Angle between unit vectors ``a`` and ``b``, negative when ``b`` is left of ``a`` seen from above."""
    cx = ay * bz - az * by
    cy = az * bx - ax * bz
    cz = ax * by - ay * bx
    # atan2 of |a x b| and a.b keeps full precision near 0 and pi, where acos does not
    mag = math.atan2(math.sqrt(cx * cx + cy * cy + cz * cz), ax * bx + ay * by + az * bz)
    return -mag if cz > 0.0 else mag


def relative_geometry(observer: EntityState, target: EntityState) -> RelativeGeometry:
    """ATA, AA, range, speed difference and bearing of ``target`` seen from ``observer``."""
    ox0, oy0, oz0, o_psi, o_v, o_gamma, _, _ = observer
    tx0, ty0, tz0, t_psi, t_v, t_gamma, _, _ = target
    if o_v <= 0.0 or t_v <= 0.0:
        raise GeometryError("relative geometry needs positive speeds for both aircraft")
    dx = tx0 - ox0
    dy = ty0 - oy0
    dz = tz0 - oz0
    rng = math.sqrt(dx * dx + dy * dy + dz * dz)
    if rng == 0.0:
        raise GeometryError("observer and target positions coincide; line of sight undefined")
    ux, uy, uz = dx / rng, dy / rng, dz / rng

    cg = math.cos(o_gamma)
    ox, oy, oz = cg * math.cos(o_psi), cg * math.sin(o_psi), math.sin(o_gamma)
    cg = math.cos(t_gamma)
    tx, ty, tz = cg * math.cos(t_psi), cg * math.sin(t_psi), math.sin(t_gamma)

    ata = _signed_angle(ox, oy, oz, ux, uy, uz)
    aa = _signed_angle(tx, ty, tz, ux, uy, uz)
    bearing = o_psi - math.atan2(dy, dx)
    if not -math.pi < bearing <= math.pi:
        bearing = wrap_angle(bearing)
    return RelativeGeometry(ata, aa, rng, abs(o_v - t_v), bearing)


def classify_orientation(g: RelativeGeometry) -> OrientationCategory:
    """Quadrant of the (|AA|, |ATA|) orientation space; boundaries close toward Offensive."""
    aa_low = abs(g.aa) <= HALF_PI
    ata_low = abs(g.ata) <= HALF_PI
    if aa_low and ata_low:
        return OrientationCategory.OFFENSIVE
    if ata_low:
        return OrientationCategory.HEAD_ON
    if aa_low:
        return OrientationCategory.NEUTRAL
    return OrientationCategory.DEFENSIVE


def lateral_offset(observer: EntityState, target: EntityState) -> float:
    """Horizontal distance from ``observer`` to the target's extended ground track."""
    dx = observer.x - target.x
    dy = observer.y - target.y
    return abs(math.cos(target.heading) * dy - math.sin(target.heading) * dx)
