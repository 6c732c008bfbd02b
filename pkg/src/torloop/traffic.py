"""AI control for cars and pedestrians.

Cars follow their spline with pure pursuit and hold a desired speed that is
the minimum of the active speed-limit target and a gap-limited speed from a
constant-time-headway policy. Pedestrians simply walk their spline at a
fixed pace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import PathSpline, TriggerVolume, ColliderShape, volume_contains
from .vehicle import ControlInput, VehicleParams, VehicleState


@dataclass(frozen=True)
class FollowPolicy:
    min_gap: float = 5.0         # m
    time_headway: float = 1.5    # s
    accel_gain: float = 0.6      # 1/s
    brake_gain: float = 1.2      # 1/s

    def __post_init__(self) -> None:
        if self.min_gap <= 0.0:
            raise ValueError("min_gap must be positive")
        if self.time_headway < 0.0:
            raise ValueError("time_headway must be non-negative")
        if self.accel_gain <= 0.0 or self.brake_gain <= 0.0:
            raise ValueError("gains must be positive")


@dataclass(frozen=True)
class SpeedTarget:
    value: float               # m/s
    source: str = "scene-default"

    def __post_init__(self) -> None:
        if self.value <= 0.0:
            raise ValueError("speed target must be positive")


@dataclass(frozen=True)
class LeadInfo:
    present: bool = False
    gap: float = 0.0           # m, bumper to bumper along the path
    lead_speed: float = 0.0    # m/s

    def __post_init__(self) -> None:
        if self.present and self.gap < 0.0:
            raise ValueError("gap must be non-negative when a lead is present")


NO_LEAD = LeadInfo()


def target_gap(speed: float, policy: FollowPolicy) -> float:
    """Desired bumper-to-bumper gap at the given speed."""
    return policy.min_gap + policy.time_headway * speed


@dataclass(frozen=True)
class DriveCommand:
    """ai_drive output: the control plus an end-of-path marker."""

    control: ControlInput
    end_of_path: bool = False


def _gap_limited_speed(lead: LeadInfo, speed: float, policy: FollowPolicy) -> float:
    """Speed that closes toward the target gap without undershooting it.

    Equilibrium is gap == target_gap with matched speeds; the divisor is
    floored so a zero-headway policy still converges.
    """
    desired = target_gap(speed, policy)
    horizon = max(policy.time_headway, 0.8)
    return max(0.0, lead.lead_speed + (lead.gap - desired) / horizon)


def ai_drive(
    state: VehicleState,
    path: PathSpline,
    s_on_path: float,
    target: SpeedTarget,
    lead: LeadInfo,
    policy: FollowPolicy,
    params: VehicleParams,
) -> DriveCommand:
    """Compute throttle/brake/steering for one tick of automated driving.

    s_on_path is the vehicle's current arc length along the path; the
    caller tracks it (see engine). Steering comes from pure pursuit on a
    lookahead point; speed control is proportional with drag feedforward.
    """
    if s_on_path >= path.total_length - 1e-6:
        return DriveCommand(ControlInput(0.0, 1.0, 0.0), end_of_path=True)

    lookahead = max(5.0, 1.5 * state.speed)
    s_target = min(s_on_path + lookahead, path.total_length)
    (tx, ty, _tz), _ = path.point_at_distance_fast(s_target)

    # Target point in the vehicle frame; pure-pursuit curvature 2y/L^2.
    dx = tx - state.x
    dy = ty - state.y
    ch = math.cos(state.heading)
    sh = math.sin(state.heading)
    local_x = ch * dx + sh * dy
    local_y = -sh * dx + ch * dy
    dist2 = local_x * local_x + local_y * local_y
    if dist2 < 1e-9:
        steering = 0.0
    else:
        curvature = 2.0 * local_y / dist2
        steer_angle = math.atan(curvature * params.wheelbase)
        steering = min(max(steer_angle / params.max_steer_angle, -1.0), 1.0)

    desired = target.value
    if lead.present:
        desired = min(desired, _gap_limited_speed(lead, state.speed, policy))

    err = desired - state.speed
    gain = policy.accel_gain if err >= 0.0 else policy.brake_gain
    accel_cmd = gain * err + params.drag * state.speed
    if accel_cmd >= 0.0:
        throttle = min(accel_cmd / params.max_accel, 1.0)
        brake = 0.0
    else:
        throttle = 0.0
        brake = min(-accel_cmd / params.max_brake, 1.0)
    return DriveCommand(ControlInput(throttle, brake, steering))


def apply_speed_limit(
    current: SpeedTarget,
    agent_collider: ColliderShape,
    previously_inside: set[str],
    limits: list[tuple[str, TriggerVolume, float, float]],
) -> tuple[SpeedTarget, set[str]]:
    """Update the agent's speed target from speed-limit trigger contacts.

    limits is (trigger id, volume, limit m/s, s along the agent's path).
    A newly entered trigger replaces the target; when several are entered
    in the same tick, the one furthest along the path wins. The target
    persists until the next trigger.
    """
    inside: set[str] = set()
    entered: list[tuple[float, str, float]] = []
    for trig_id, vol, limit, s_along in limits:
        if volume_contains(vol, agent_collider):
            inside.add(trig_id)
            if trig_id not in previously_inside:
                entered.append((s_along, trig_id, limit))
    if entered:
        entered.sort()
        s_along, trig_id, limit = entered[-1]
        return SpeedTarget(limit, source=trig_id), inside
    return current, inside


@dataclass(frozen=True)
class PedestrianState:
    s: float
    x: float
    y: float
    z: float
    heading: float
    done: bool = False


def step_pedestrian(
    path: PathSpline,
    state: PedestrianState,
    cruise_speed: float,
    dt: float,
    loop: bool = False,
) -> PedestrianState:
    """Advance a path walker by cruise_speed*dt; hold or wrap at the end."""
    if state.done and not loop:
        return state
    s = state.s + cruise_speed * dt
    done = False
    if s >= path.total_length:
        if loop:
            s -= path.total_length
        else:
            s = path.total_length
            done = True
    (px, py, pz), (tx, ty, _tz) = path.point_at_distance_fast(s)
    return PedestrianState(
        s=s, x=px, y=py, z=pz, heading=math.atan2(ty, tx), done=done
    )
