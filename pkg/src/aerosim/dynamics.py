"""Point-mass coordinated-turn flight dynamics and the flight control system.

The agent speaks in heading/altitude/speed set-points (:class:`FlightCommand`).
:func:`fcs_step` turns those into rate-limited bank, flight-path angle and
longitudinal acceleration (:class:`ActuatorState`), and :func:`dynamics_step`
integrates the kinematics one forward-Euler step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .state import EntityState, wrap_angle

G = 9.81


def _clip(value: float, lo: float, hi: float) -> float:
    return lo if value < lo else hi if value > hi else value


@dataclass(frozen=True, slots=True)
class PerformanceLimits:
    v_min: float = 50.0
    v_max: float = 400.0
    bank_max: float = math.radians(60.0)
    roll_rate_max: float = math.radians(90.0)
    gamma_max: float = math.radians(20.0)
    pitch_rate_max: float = math.radians(10.0)
    accel_min: float = -8.0
    accel_max: float = 8.0
    g: float = G
    # FCS gains
    k_alt: float = 0.005
    k_v: float = 1.0
    k_bank: float = 4.0
    heading_deadband: float = math.radians(0.5)

    def __post_init__(self) -> None:
        for name in ("v_max", "bank_max", "roll_rate_max", "gamma_max", "pitch_rate_max", "g"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.v_min < self.v_max:
            raise ValueError("need 0 < v_min < v_max")
        if not self.accel_min < 0.0 < self.accel_max:
            raise ValueError("need accel_min < 0 < accel_max")
        if self.k_alt < 0.0 or self.k_v < 0.0 or self.k_bank <= 0.0 or self.heading_deadband < 0.0:
            raise ValueError("FCS gains must be non-negative (k_bank positive)")


class FlightCommand(NamedTuple):
    desired_heading: float
    desired_altitude: float
    desired_speed: float

    @classmethod
    def hold(cls, state: EntityState) -> "FlightCommand":
        return cls(state.heading, state.z, state.speed)

    def normalized(self, limits: PerformanceLimits) -> "FlightCommand":
        return FlightCommand(
            wrap_angle(self.desired_heading),
            self.desired_altitude,
            _clip(self.desired_speed, limits.v_min, limits.v_max),
        )


class ActuatorState(NamedTuple):
    bank: float
    gamma: float
    accel: float


def heading_error(current: float, desired: float) -> float:
    """Clockwise turn needed to reach ``desired``, in (-pi, pi]; positive means turn right."""
    return wrap_angle(current - desired)


def fcs_step(state: EntityState, cmd: FlightCommand, limits: PerformanceLimits, dt: float) -> ActuatorState:
    """One flight-control update.

    Bank heads for ``k_bank * heading_error`` saturated at ``bank_max``, so any
    error beyond ``bank_max / k_bank`` commands a full-deflection turn; inside
    the dead-band it rolls back to wings level. Roll and pitch are rate limited.
    """
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    _, _, z, heading, speed, cur_gamma, cur_bank, _ = state
    desired_heading, desired_altitude, v_des = cmd
    bm = limits.bank_max
    err = heading - desired_heading
    if not -math.pi < err <= math.pi:
        err = wrap_angle(err)
    if -limits.heading_deadband < err < limits.heading_deadband:
        bank_target = 0.0
    else:
        bank_target = limits.k_bank * err
        bank_target = -bm if bank_target < -bm else bm if bank_target > bm else bank_target
    step = limits.roll_rate_max * dt
    d = bank_target - cur_bank
    bank = cur_bank + (-step if d < -step else step if d > step else d)
    bank = -bm if bank < -bm else bm if bank > bm else bank

    gm = limits.gamma_max
    gamma_target = limits.k_alt * (desired_altitude - z)
    gamma_target = -gm if gamma_target < -gm else gm if gamma_target > gm else gamma_target
    step = limits.pitch_rate_max * dt
    d = gamma_target - cur_gamma
    gamma = cur_gamma + (-step if d < -step else step if d > step else d)
    gamma = -gm if gamma < -gm else gm if gamma > gm else gamma

    v_des = limits.v_min if v_des < limits.v_min else limits.v_max if v_des > limits.v_max else v_des
    accel = limits.k_v * (v_des - speed)
    accel = limits.accel_min if accel < limits.accel_min else limits.accel_max if accel > limits.accel_max else accel
    return ActuatorState(bank, gamma, accel)


def dynamics_step(
    state: EntityState,
    act: ActuatorState,
    limits: PerformanceLimits,
    dt: float,
    time: float | None = None,
) -> EntityState:
    """Advance the point-mass state by one forward-Euler step.

    Actuator angles take effect at the start of the step. Speed is clamped to
    the performance envelope and altitude to the ground. ``time`` stamps the
    successor (default ``state.time + dt``).
    """
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    x, y, z, psi, v, g0, b0, t0 = state
    bank, gamma, accel = act
    # any NaN or inf poisons the sum
    if not math.isfinite(x + y + z + psi + v + g0 + b0 + t0 + bank + gamma + accel):
        raise ValueError("non-finite state or actuator input")
    bm = limits.bank_max
    bank = -bm if bank < -bm else bm if bank > bm else bank
    gm = limits.gamma_max
    gamma = -gm if gamma < -gm else gm if gamma > gm else gamma
    vdt = v * dt
    hor = vdt * math.cos(gamma)
    z += vdt * math.sin(gamma)
    if z < 0.0:
        z = 0.0
    v_new = v + accel * dt
    v_new = limits.v_min if v_new < limits.v_min else limits.v_max if v_new > limits.v_max else v_new
    psi_new = psi - (limits.g / v) * math.tan(bank) * dt
    if not -math.pi < psi_new <= math.pi:
        psi_new = wrap_angle(psi_new)
    return EntityState(
        x + hor * math.cos(psi),
        y + hor * math.sin(psi),
        z,
        psi_new,
        v_new,
        gamma,
        bank,
        t0 + dt if time is None else time,
    )


def fly_step(state: EntityState, cmd: FlightCommand, limits: PerformanceLimits, dt: float, time: float) -> EntityState:
    """``dynamics_step(state, fcs_step(state, cmd, limits, dt), limits, dt, time)`` in one call.

    The engine's per-tick path; same arithmetic in the same order, so results
    are bit-identical to the composition.
    """
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    x, y, z, psi, v, cur_gamma, cur_bank, t0 = state
    desired_heading, desired_altitude, v_des = cmd
    bm = limits.bank_max
    err = psi - desired_heading
    if not -math.pi < err <= math.pi:
        err = wrap_angle(err)
    if -limits.heading_deadband < err < limits.heading_deadband:
        bank_target = 0.0
    else:
        bank_target = limits.k_bank * err
        bank_target = -bm if bank_target < -bm else bm if bank_target > bm else bank_target
    step = limits.roll_rate_max * dt
    d = bank_target - cur_bank
    bank = cur_bank + (-step if d < -step else step if d > step else d)
    bank = -bm if bank < -bm else bm if bank > bm else bank

    gm = limits.gamma_max
    gamma_target = limits.k_alt * (desired_altitude - z)
    gamma_target = -gm if gamma_target < -gm else gm if gamma_target > gm else gamma_target
    step = limits.pitch_rate_max * dt
    d = gamma_target - cur_gamma
    gamma = cur_gamma + (-step if d < -step else step if d > step else d)
    gamma = -gm if gamma < -gm else gm if gamma > gm else gamma

    v_des = limits.v_min if v_des < limits.v_min else limits.v_max if v_des > limits.v_max else v_des
    accel = limits.k_v * (v_des - v)
    accel = limits.accel_min if accel < limits.accel_min else limits.accel_max if accel > limits.accel_max else accel

    if not math.isfinite(x + y + z + psi + v + cur_gamma + cur_bank + t0 + bank + gamma + accel):
        raise ValueError("non-finite state or actuator input")
    vdt = v * dt
    hor = vdt * math.cos(gamma)
    z += vdt * math.sin(gamma)
    if z < 0.0:
        z = 0.0
    v_new = v + accel * dt
    v_new = limits.v_min if v_new < limits.v_min else limits.v_max if v_new > limits.v_max else v_new
    psi_new = psi - (limits.g / v) * math.tan(bank) * dt
    if not -math.pi < psi_new <= math.pi:
        psi_new = wrap_angle(psi_new)
    return EntityState(x + hor * math.cos(psi), y + hor * math.sin(psi), z, psi_new, v_new, gamma, bank, time)


def turn_rate(speed: float, bank: float, g: float = G) -> float:
    """Signed heading rate of a coordinated turn (negative for right bank)."""
    return -(g / speed) * math.tan(bank)


def turn_radius(speed: float, bank: float, g: float = G) -> float:
    return speed * speed / (g * math.tan(abs(bank)))
