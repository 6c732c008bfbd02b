"""Ego and AI vehicle dynamics.

A kinematic bicycle model integrated with explicit Euler at a fixed
timestep. Throttle, brake, and steering are the only inputs; the model is
planar (z is carried through unchanged) and fully deterministic: identical
inputs produce bitwise-identical states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

TICK_RATE_HZ = 90
DT = 1.0 / TICK_RATE_HZ


def _wrap_angle(a: float) -> float:
    while a > math.pi:
        a -= 2.0 * math.pi
    while a < -math.pi:
        a += 2.0 * math.pi
    return a


@dataclass(frozen=True)
class ControlInput:
    """Throttle/brake in [0,1], steering in [-1,1] (full left to full right)."""

    throttle: float = 0.0
    brake: float = 0.0
    steering: float = 0.0

    def clamped(self) -> "ControlInput":
        if not (
            math.isfinite(self.throttle)
            and math.isfinite(self.brake)
            and math.isfinite(self.steering)
        ):
            raise ValueError("non-finite control input")
        return ControlInput(
            min(max(self.throttle, 0.0), 1.0),
            min(max(self.brake, 0.0), 1.0),
            min(max(self.steering, -1.0), 1.0),
        )

    def is_zero(self) -> bool:
        return self.throttle == 0.0 and self.brake == 0.0 and self.steering == 0.0


ZERO_INPUT = ControlInput()


@dataclass(frozen=True)
class VehicleParams:
    max_accel: float = 3.0        # m/s^2 at full throttle
    max_brake: float = 8.0        # m/s^2 at full brake
    max_steer_angle: float = 0.55  # rad
    wheelbase: float = 2.7        # m
    drag: float = 0.02            # 1/s linear velocity damping
    top_speed: float = 36.11      # m/s (130 km/h)
    length: float = 4.5           # m, bumper to bumper
    width: float = 1.8            # m

    def __post_init__(self) -> None:
        if min(self.max_accel, self.max_brake, self.max_steer_angle,
               self.wheelbase, self.top_speed, self.length, self.width) <= 0.0:
            raise ValueError("vehicle parameters must be positive")
        if self.drag < 0.0:
            raise ValueError("drag must be non-negative")
        if self.max_steer_angle >= math.pi / 2.0:
            raise ValueError("max steer angle must be below pi/2")


class ControlMode(Enum):
    AUTOMATED = "Automated"
    MANUAL = "Manual"


@dataclass(frozen=True)
class VehicleState:
    x: float
    y: float
    z: float
    heading: float          # rad, wrapped to [-pi, pi]
    speed: float            # m/s, longitudinal, never negative
    control_mode: ControlMode = ControlMode.AUTOMATED
    fault: bool = False     # set when a non-finite input was rejected

    def with_mode(self, mode: ControlMode) -> "VehicleState":
        return replace(self, control_mode=mode)


def step_vehicle(
    state: VehicleState,
    inp: ControlInput,
    params: VehicleParams,
    dt: float = DT,
) -> VehicleState:
    """Advance one fixed timestep under the kinematic bicycle model."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    try:
        inp = inp.clamped()
    except ValueError:
        return replace(state, fault=True)
    accel = inp.throttle * params.max_accel - inp.brake * params.max_brake
    accel -= params.drag * state.speed
    speed = min(max(state.speed + accel * dt, 0.0), params.top_speed)
    steer = inp.steering * params.max_steer_angle
    heading = _wrap_angle(
        state.heading + (speed / params.wheelbase) * math.tan(steer) * dt
    )
    return VehicleState(
        x=state.x + speed * math.cos(heading) * dt,
        y=state.y + speed * math.sin(heading) * dt,
        z=state.z,
        heading=heading,
        speed=speed,
        control_mode=state.control_mode,
        fault=False,
    )
