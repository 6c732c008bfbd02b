"""Critical-traffic-event state machine.

An event zone arms at its start gate, hands control to the driver with a
takeover notice, fails (black screen + respawn + control back to
automation) on boundary contact, and succeeds at the end gate. Trigger
contacts in any non-matching phase are ignored; a zone never re-arms
within the same scene pass.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .geometry import TriggerKind, TriggerVolume, Vec3
from .vehicle import ControlInput

INPUT_DEADZONE = 0.05


class ZonePhase(Enum):
    IDLE = "Idle"
    ACTIVE = "Active"
    SUCCEEDED = "Succeeded"
    FAILED = "Failed"


@dataclass(frozen=True)
class RespawnPoint:
    position: Vec3
    heading: float
    s_on_path: float


@dataclass(frozen=True)
class EventZoneSpec:
    id: str
    start_gate: TriggerVolume
    end_gate: TriggerVolume
    boundaries: tuple[TriggerVolume, ...]
    respawn: RespawnPoint
    critical_objects: tuple[str, ...]
    tor_budget: float
    tor_lead_s: float = 0.0

    def __post_init__(self) -> None:
        if not self.boundaries:
            raise ValueError(f"zone {self.id}: needs at least one boundary")
        if self.tor_budget <= 0.0:
            raise ValueError(f"zone {self.id}: tor_budget must be positive")
        if self.tor_lead_s < 0.0:
            raise ValueError(f"zone {self.id}: tor_lead_s must be non-negative")


@dataclass(frozen=True)
class TorNotice:
    zone_id: str
    issued_tick: int
    budget: float
    critical_objects: tuple[str, ...]


@dataclass(frozen=True)
class RespawnCommand:
    zone_id: str
    position: Vec3
    heading: float
    s_on_path: float
    fade: bool = True


@dataclass
class EventZoneState:
    spec: EventZoneSpec
    phase: ZonePhase = ZonePhase.IDLE
    tor_issued_tick: int | None = None
    first_manual_input_tick: int | None = None
    time_to_conflict_s: float | None = None


def on_trigger_contact(
    zone: EventZoneState, which: TriggerKind, tick: int
) -> tuple[EventZoneState, list[object]]:
    """Apply one trigger contact; returns the new state and emitted commands.

    StartGate while Idle arms the zone and issues the takeover notice.
    Boundary while Active fails it and orders a fade+respawn. EndGate
    while Active succeeds. Everything else is ignored by contract.
    """
    spec = zone.spec
    if which is TriggerKind.START_GATE and zone.phase is ZonePhase.IDLE:
        new = replace(zone, phase=ZonePhase.ACTIVE, tor_issued_tick=tick)
        notice = TorNotice(spec.id, tick, spec.tor_budget, spec.critical_objects)
        return new, [notice]
    if which is TriggerKind.BOUNDARY and zone.phase is ZonePhase.ACTIVE:
        new = replace(zone, phase=ZonePhase.FAILED)
        cmd = RespawnCommand(
            spec.id,
            spec.respawn.position,
            spec.respawn.heading,
            spec.respawn.s_on_path,
        )
        return new, [cmd]
    if which is TriggerKind.END_GATE and zone.phase is ZonePhase.ACTIVE:
        return replace(zone, phase=ZonePhase.SUCCEEDED), []
    return zone, []


def record_first_input(
    zone: EventZoneState, inp: ControlInput, tick: int
) -> EventZoneState:
    """Latch the first above-deadzone manual input after the takeover notice."""
    if zone.phase is not ZonePhase.ACTIVE or zone.tor_issued_tick is None:
        return zone
    if zone.first_manual_input_tick is not None:
        return zone
    if tick < zone.tor_issued_tick:
        return zone
    if (
        abs(inp.steering) > INPUT_DEADZONE
        or inp.brake > INPUT_DEADZONE
        or inp.throttle > INPUT_DEADZONE
    ):
        return replace(zone, first_manual_input_tick=tick)
    return zone


def takeover_time(zone: EventZoneState, tick_rate: float) -> float | None:
    """Seconds from takeover notice to first manual input; None if none came."""
    if zone.tor_issued_tick is None or zone.first_manual_input_tick is None:
        return None
    return (zone.first_manual_input_tick - zone.tor_issued_tick) / tick_rate


CRITICAL_CONFLICT_S = 4.0


def is_critical(zone: EventZoneState) -> bool:
    """True when time-to-conflict at takeover issuance was under 4 seconds."""
    return (
        zone.time_to_conflict_s is not None
        and zone.time_to_conflict_s < CRITICAL_CONFLICT_S
    )
