"""torloop: a deterministic takeover-request driving-simulation kernel.

Headless re-implementation of the event-zone, traffic-AI, control-handoff,
gaze-validation, and telemetry machinery of a takeover-request experiment,
plus a live WebSocket session protocol for a human driver.
"""

from .vehicle import ControlInput, ControlMode, VehicleParams, VehicleState
from .geometry import Vec3, BezierSegment, PathSpline, Ray, TriggerVolume
from .scenario import Scenario, parse_scenario, load_scenario, validate_scenario

__version__ = "0.1.0"

__all__ = [
    "ControlInput",
    "ControlMode",
    "VehicleParams",
    "VehicleState",
    "Vec3",
    "BezierSegment",
    "PathSpline",
    "Ray",
    "TriggerVolume",
    "Scenario",
    "parse_scenario",
    "load_scenario",
    "validate_scenario",
    "__version__",
]
