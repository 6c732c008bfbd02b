"""Declarative scenario model, its JSON format, and validation.

A scenario is a single JSON document (`version`, `name`, `seed`,
`scenes`). Each scene declares named paths (as raw Bezier segments or as
polylines fitted with Catmull-Rom tangents), scene objects with colliders,
traffic and pedestrian spawns, speed-limit triggers, and event zones. See
docs/scenario-format.md for the full schema.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

from .events import EventZoneSpec, RespawnPoint
from .geometry import (
    BezierSegment,
    BoxShape,
    ColliderShape,
    ColliderTag,
    DomainError,
    PathSpline,
    SphereShape,
    TriggerKind,
    TriggerVolume,
    Vec3,
)
from .traffic import FollowPolicy

SCENARIO_VERSION = 1


class ScenarioError(ValueError):
    """Base class for scenario document problems."""


class ScenarioSyntaxError(ScenarioError):
    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class SchemaViolation(ScenarioError):
    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path


class UnknownReference(ScenarioError):
    def __init__(self, path: str, ref: str) -> None:
        super().__init__(f"{path}: unknown reference {ref!r}")
        self.path = path
        self.ref = ref


def polyline_to_segments(points: list[Vec3]) -> list[BezierSegment]:
    """Fit cubic Bezier segments through a polyline.

    Catmull-Rom tangents (tension 0.5) with duplicated end points; the
    resulting spline interpolates every input point exactly.
    """
    if len(points) < 2:
        raise ScenarioError("polyline needs at least 2 points")
    ext = [points[0], *points, points[-1]]
    segments: list[BezierSegment] = []
    for i in range(len(points) - 1):
        p0 = ext[i]
        p1 = ext[i + 1]
        p2 = ext[i + 2]
        p3 = ext[i + 3]
        m1 = (p2 - p0).scale(0.5)
        m2 = (p3 - p1).scale(0.5)
        segments.append(
            BezierSegment(
                p1,
                p1 + m1.scale(1.0 / 3.0),
                p2 - m2.scale(1.0 / 3.0),
                p2,
            )
        )
    return segments


@dataclass(frozen=True)
class AgentSpawn:
    id: str
    kind: str                     # "AiCar" | "Pedestrian"
    path_name: str
    start_s: float
    cruise_speed: float
    follow_policy: FollowPolicy | None = None
    loop: bool = False


@dataclass(frozen=True)
class SpeedLimitTrigger:
    id: str
    volume: TriggerVolume
    limit: float                  # m/s


@dataclass
class SceneSpec:
    name: str
    path_defs: dict[str, dict[str, Any]]
    paths: dict[str, PathSpline]
    ego_path_name: str
    ego_start_s: float
    default_speed_limit: float
    objects: list[ColliderShape]
    traffic: list[AgentSpawn]
    pedestrians: list[AgentSpawn]
    speed_limits: list[SpeedLimitTrigger]
    event_zones: list[EventZoneSpec]
    expected_length: float | None = None
    max_duration_s: float = 600.0

    @property
    def ego_path(self) -> PathSpline:
        return self.paths[self.ego_path_name]


@dataclass
class Scenario:
    name: str
    seed: int
    scenes: list[SceneSpec]
    source_text: str = ""

    def content_hash(self) -> str:
        return hashlib.sha256(serialize_scenario(self).encode("utf-8")).hexdigest()


# --- parsing helpers ------------------------------------------------------


def _require(obj: dict, key: str, path: str) -> Any:
    if key not in obj:
        raise SchemaViolation(path, f"missing required key {key!r}")
    return obj[key]


def _vec3(value: Any, path: str) -> Vec3:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 3
        or not all(isinstance(v, (int, float)) for v in value)
    ):
        raise SchemaViolation(path, "expected [x, y, z] numbers")
    return Vec3(float(value[0]), float(value[1]), float(value[2]))


def _number(value: Any, path: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise SchemaViolation(path, "expected a number")
    return float(value)


def _volume(obj: Any, path: str, kind: TriggerKind) -> TriggerVolume:
    if not isinstance(obj, dict):
        raise SchemaViolation(path, "expected a volume object")
    try:
        return TriggerVolume(
            center=_vec3(_require(obj, "center", path), f"{path}.center"),
            half_extents=_vec3(
                _require(obj, "half_extents", path), f"{path}.half_extents"
            ),
            yaw=_number(obj.get("yaw", 0.0), f"{path}.yaw"),
            kind=kind,
        )
    except DomainError as exc:
        raise SchemaViolation(path, str(exc)) from exc


def _shape(obj: Any, path: str) -> BoxShape | SphereShape:
    if not isinstance(obj, dict) or "type" not in obj:
        raise SchemaViolation(path, "expected a shape object with a type")
    try:
        if obj["type"] == "sphere":
            return SphereShape(
                center=_vec3(_require(obj, "center", path), f"{path}.center"),
                radius=_number(_require(obj, "radius", path), f"{path}.radius"),
            )
        if obj["type"] == "box":
            return BoxShape(
                center=_vec3(_require(obj, "center", path), f"{path}.center"),
                half_extents=_vec3(
                    _require(obj, "half_extents", path), f"{path}.half_extents"
                ),
                yaw=_number(obj.get("yaw", 0.0), f"{path}.yaw"),
            )
    except DomainError as exc:
        raise SchemaViolation(path, str(exc)) from exc
    raise SchemaViolation(path, f"unknown shape type {obj['type']!r}")


def _compile_path(defn: Any, path: str) -> PathSpline:
    if not isinstance(defn, dict):
        raise SchemaViolation(path, "expected a path object")
    try:
        if "points" in defn:
            pts = [
                _vec3(p, f"{path}.points[{i}]") for i, p in enumerate(defn["points"])
            ]
            return PathSpline(polyline_to_segments(pts))
        if "segments" in defn:
            segs = []
            for i, seg in enumerate(defn["segments"]):
                if not isinstance(seg, list) or len(seg) != 4:
                    raise SchemaViolation(
                        f"{path}.segments[{i}]", "expected four control points"
                    )
                segs.append(
                    BezierSegment(*(_vec3(p, f"{path}.segments[{i}]") for p in seg))
                )
            return PathSpline(segs)
    except (DomainError, ScenarioError) as exc:
        if isinstance(exc, SchemaViolation):
            raise
        raise SchemaViolation(path, str(exc)) from exc
    raise SchemaViolation(path, "path needs either 'points' or 'segments'")


def _parse_limit(obj: dict, path: str) -> float:
    if "limit" in obj:
        limit = _number(obj["limit"], f"{path}.limit")
    elif "limit_kmh" in obj:
        limit = _number(obj["limit_kmh"], f"{path}.limit_kmh") / 3.6
    else:
        raise SchemaViolation(path, "missing 'limit' (m/s) or 'limit_kmh'")
    if limit <= 0.0:
        raise SchemaViolation(path, "speed limit must be positive")
    return limit


def _parse_spawn(obj: Any, path: str, kind: str, paths: dict[str, PathSpline]) -> AgentSpawn:
    if not isinstance(obj, dict):
        raise SchemaViolation(path, "expected an agent object")
    path_name = _require(obj, "path", path)
    if path_name not in paths:
        raise UnknownReference(f"{path}.path", path_name)
    start_s = _number(obj.get("start_s", 0.0), f"{path}.start_s")
    spline = paths[path_name]
    if not 0.0 <= start_s <= spline.total_length:
        raise SchemaViolation(f"{path}.start_s", "start_s outside the path")
    cruise = _number(_require(obj, "cruise_speed", path), f"{path}.cruise_speed")
    if cruise <= 0.0:
        raise SchemaViolation(f"{path}.cruise_speed", "cruise_speed must be positive")
    policy = None
    if kind == "AiCar":
        fp = obj.get("follow_policy", {})
        if not isinstance(fp, dict):
            raise SchemaViolation(f"{path}.follow_policy", "expected an object")
        try:
            policy = FollowPolicy(
                min_gap=float(fp.get("min_gap", 5.0)),
                time_headway=float(fp.get("time_headway", 1.5)),
                accel_gain=float(fp.get("accel_gain", 0.6)),
                brake_gain=float(fp.get("brake_gain", 1.2)),
            )
        except ValueError as exc:
            raise SchemaViolation(f"{path}.follow_policy", str(exc)) from exc
    return AgentSpawn(
        id=str(_require(obj, "id", path)),
        kind=kind,
        path_name=path_name,
        start_s=start_s,
        cruise_speed=cruise,
        follow_policy=policy,
        loop=bool(obj.get("loop", False)),
    )


def _parse_scene(obj: Any, path: str) -> SceneSpec:
    if not isinstance(obj, dict):
        raise SchemaViolation(path, "expected a scene object")
    name = str(_require(obj, "name", path))
    raw_paths = _require(obj, "paths", path)
    if not isinstance(raw_paths, dict) or not raw_paths:
        raise SchemaViolation(f"{path}.paths", "expected a non-empty object")
    paths = {
        pname: _compile_path(pdef, f"{path}.paths.{pname}")
        for pname, pdef in raw_paths.items()
    }
    ego_path_name = str(_require(obj, "ego_path", path))
    if ego_path_name not in paths:
        raise UnknownReference(f"{path}.ego_path", ego_path_name)
    ego_start_s = _number(obj.get("ego_start_s", 0.0), f"{path}.ego_start_s")
    ego_spline = paths[ego_path_name]
    if not 0.0 <= ego_start_s <= ego_spline.total_length:
        raise SchemaViolation(f"{path}.ego_start_s", "outside the ego path")
    default_limit = _number(
        obj.get("default_speed_limit", 13.89), f"{path}.default_speed_limit"
    )
    if default_limit <= 0.0:
        raise SchemaViolation(f"{path}.default_speed_limit", "must be positive")

    objects: list[ColliderShape] = []
    seen_ids: set[str] = set()
    for i, o in enumerate(obj.get("objects", [])):
        opath = f"{path}.objects[{i}]"
        oid = str(_require(o, "id", opath))
        if oid in seen_ids:
            raise SchemaViolation(opath, f"duplicate object id {oid!r}")
        seen_ids.add(oid)
        tag_text = o.get("tag", "SceneObject")
        try:
            tag = ColliderTag(tag_text)
        except ValueError as exc:
            raise SchemaViolation(f"{opath}.tag", f"unknown tag {tag_text!r}") from exc
        objects.append(
            ColliderShape(oid, _shape(_require(o, "shape", opath), f"{opath}.shape"), tag)
        )

    traffic = [
        _parse_spawn(o, f"{path}.traffic[{i}]", "AiCar", paths)
        for i, o in enumerate(obj.get("traffic", []))
    ]
    pedestrians = [
        _parse_spawn(o, f"{path}.pedestrians[{i}]", "Pedestrian", paths)
        for i, o in enumerate(obj.get("pedestrians", []))
    ]
    for i, spawn in enumerate(traffic + pedestrians):
        if spawn.id in seen_ids:
            raise SchemaViolation(path, f"duplicate agent id {spawn.id!r}")
        seen_ids.add(spawn.id)

    speed_limits: list[SpeedLimitTrigger] = []
    for i, o in enumerate(obj.get("speed_limits", [])):
        spath = f"{path}.speed_limits[{i}]"
        speed_limits.append(
            SpeedLimitTrigger(
                id=str(o.get("id", f"limit_{i}")),
                volume=_volume(
                    _require(o, "volume", spath), f"{spath}.volume",
                    TriggerKind.SPEED_LIMIT,
                ),
                limit=_parse_limit(o, spath),
            )
        )

    zones: list[EventZoneSpec] = []
    for i, o in enumerate(obj.get("event_zones", [])):
        zpath = f"{path}.event_zones[{i}]"
        respawn_obj = _require(o, "respawn", zpath)
        for ref in o.get("critical_objects", []):
            if ref not in seen_ids:
                raise UnknownReference(f"{zpath}.critical_objects", ref)
        boundaries = tuple(
            _volume(b, f"{zpath}.boundaries[{j}]", TriggerKind.BOUNDARY)
            for j, b in enumerate(_require(o, "boundaries", zpath))
        )
        try:
            zones.append(
                EventZoneSpec(
                    id=str(_require(o, "id", zpath)),
                    start_gate=_volume(
                        _require(o, "start_gate", zpath), f"{zpath}.start_gate",
                        TriggerKind.START_GATE,
                    ),
                    end_gate=_volume(
                        _require(o, "end_gate", zpath), f"{zpath}.end_gate",
                        TriggerKind.END_GATE,
                    ),
                    boundaries=boundaries,
                    respawn=RespawnPoint(
                        position=_vec3(
                            _require(respawn_obj, "position", f"{zpath}.respawn"),
                            f"{zpath}.respawn.position",
                        ),
                        heading=_number(
                            respawn_obj.get("heading", 0.0), f"{zpath}.respawn.heading"
                        ),
                        s_on_path=_number(
                            _require(respawn_obj, "s_on_path", f"{zpath}.respawn"),
                            f"{zpath}.respawn.s_on_path",
                        ),
                    ),
                    critical_objects=tuple(
                        str(c) for c in o.get("critical_objects", [])
                    ),
                    tor_budget=_number(o.get("tor_budget", 10.0), f"{zpath}.tor_budget"),
                    tor_lead_s=_number(o.get("tor_lead_s", 0.0), f"{zpath}.tor_lead_s"),
                )
            )
        except ValueError as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise SchemaViolation(zpath, str(exc)) from exc

    expected = obj.get("expected_length")
    if expected is not None:
        expected = _number(expected, f"{path}.expected_length")
    return SceneSpec(
        name=name,
        path_defs={k: dict(v) for k, v in raw_paths.items()},
        paths=paths,
        ego_path_name=ego_path_name,
        ego_start_s=ego_start_s,
        default_speed_limit=default_limit,
        objects=objects,
        traffic=traffic,
        pedestrians=pedestrians,
        speed_limits=speed_limits,
        event_zones=zones,
        expected_length=expected,
        max_duration_s=_number(obj.get("max_duration_s", 600.0), f"{path}.max_duration_s"),
    )


def parse_scenario(text: str) -> Scenario:
    """Parse and fully resolve a scenario document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioSyntaxError(exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(doc, dict):
        raise SchemaViolation("$", "top level must be an object")
    version = _require(doc, "version", "$")
    if version != SCENARIO_VERSION:
        raise SchemaViolation("$.version", f"unsupported version {version!r}")
    name = str(_require(doc, "name", "$"))
    seed = _require(doc, "seed", "$")
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise SchemaViolation("$.seed", "seed must be an integer")
    raw_scenes = _require(doc, "scenes", "$")
    if not isinstance(raw_scenes, list) or not raw_scenes:
        raise SchemaViolation("$.scenes", "expected a non-empty list")
    scenes = [
        _parse_scene(s, f"$.scenes[{i}]") for i, s in enumerate(raw_scenes)
    ]
    names = [s.name for s in scenes]
    if len(set(names)) != len(names):
        raise SchemaViolation("$.scenes", "scene names must be unique")
    return Scenario(name=name, seed=seed, scenes=scenes, source_text=text)


def load_scenario(path: str) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


# --- serialization --------------------------------------------------------


def _vec_obj(v: Vec3) -> list[float]:
    return [v.x, v.y, v.z]


def _volume_obj(v: TriggerVolume) -> dict[str, Any]:
    return {
        "center": _vec_obj(v.center),
        "half_extents": _vec_obj(v.half_extents),
        "yaw": v.yaw,
    }


def _shape_obj(s: BoxShape | SphereShape) -> dict[str, Any]:
    if isinstance(s, SphereShape):
        return {"type": "sphere", "center": _vec_obj(s.center), "radius": s.radius}
    return {
        "type": "box",
        "center": _vec_obj(s.center),
        "half_extents": _vec_obj(s.half_extents),
        "yaw": s.yaw,
    }


def _spawn_obj(a: AgentSpawn) -> dict[str, Any]:
    out: dict[str, Any] = {
        "id": a.id,
        "path": a.path_name,
        "start_s": a.start_s,
        "cruise_speed": a.cruise_speed,
    }
    if a.follow_policy is not None:
        out["follow_policy"] = {
            "min_gap": a.follow_policy.min_gap,
            "time_headway": a.follow_policy.time_headway,
            "accel_gain": a.follow_policy.accel_gain,
            "brake_gain": a.follow_policy.brake_gain,
        }
    if a.loop:
        out["loop"] = True
    return out


def scenario_to_obj(sc: Scenario) -> dict[str, Any]:
    scenes = []
    for s in sc.scenes:
        scene: dict[str, Any] = {
            "name": s.name,
            "paths": s.path_defs,
            "ego_path": s.ego_path_name,
            "ego_start_s": s.ego_start_s,
            "default_speed_limit": s.default_speed_limit,
            "objects": [
                {"id": o.id, "tag": o.tag.value, "shape": _shape_obj(o.shape)}
                for o in s.objects
            ],
            "traffic": [_spawn_obj(a) for a in s.traffic],
            "pedestrians": [_spawn_obj(a) for a in s.pedestrians],
            "speed_limits": [
                {"id": t.id, "volume": _volume_obj(t.volume), "limit": t.limit}
                for t in s.speed_limits
            ],
            "event_zones": [
                {
                    "id": z.id,
                    "start_gate": _volume_obj(z.start_gate),
                    "end_gate": _volume_obj(z.end_gate),
                    "boundaries": [_volume_obj(b) for b in z.boundaries],
                    "respawn": {
                        "position": _vec_obj(z.respawn.position),
                        "heading": z.respawn.heading,
                        "s_on_path": z.respawn.s_on_path,
                    },
                    "critical_objects": list(z.critical_objects),
                    "tor_budget": z.tor_budget,
                    "tor_lead_s": z.tor_lead_s,
                }
                for z in s.event_zones
            ],
            "max_duration_s": s.max_duration_s,
        }
        if s.expected_length is not None:
            scene["expected_length"] = s.expected_length
        scenes.append(scene)
    return {
        "version": SCENARIO_VERSION,
        "name": sc.name,
        "seed": sc.seed,
        "scenes": scenes,
    }


def serialize_scenario(sc: Scenario) -> str:
    return json.dumps(
        scenario_to_obj(sc), sort_keys=True, separators=(",", ":"), allow_nan=False
    )


# --- validation -----------------------------------------------------------


@dataclass(frozen=True)
class Finding:
    severity: str   # "error" | "warning"
    scene: str
    code: str
    message: str


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "error"]

    @property
    def warnings(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "warning"]

    @property
    def runnable(self) -> bool:
        return not self.errors


def validate_scenario(sc: Scenario) -> ValidationReport:
    """Structural checks beyond parsing; an empty error list means runnable."""
    report = ValidationReport()

    def err(scene: str, code: str, msg: str) -> None:
        report.findings.append(Finding("error", scene, code, msg))

    def warn(scene: str, code: str, msg: str) -> None:
        report.findings.append(Finding("warning", scene, code, msg))

    for scene in sc.scenes:
        ego = scene.ego_path
        zone_spans: list[tuple[float, float, str]] = []
        for zone in scene.event_zones:
            start_s, _ = ego.project_to_path(zone.start_gate.center)
            end_s, _ = ego.project_to_path(zone.end_gate.center)
            zone_spans.append((start_s, end_s, zone.id))
            if start_s >= end_s:
                err(
                    scene.name,
                    "gate-order",
                    f"zone {zone.id}: start gate (s={start_s:.1f}) is not before "
                    f"end gate (s={end_s:.1f})",
                )
            if zone.respawn.s_on_path <= end_s:
                err(
                    scene.name,
                    "respawn-not-after-event",
                    f"zone {zone.id}: respawn not after event "
                    f"(respawn s={zone.respawn.s_on_path:.1f}, end gate s={end_s:.1f})",
                )
            if zone.respawn.s_on_path > ego.total_length:
                err(
                    scene.name,
                    "respawn-off-path",
                    f"zone {zone.id}: respawn s beyond the ego path",
                )
        starts = [span[0] for span in zone_spans]
        if starts != sorted(starts):
            err(scene.name, "zone-order", "event zones not ordered by start-gate s")
        for a, b in zip(zone_spans, zone_spans[1:]):
            if a[1] > b[0]:
                warn(
                    scene.name,
                    "zone-overlap",
                    f"zones {a[2]} and {b[2]} overlap along the ego path",
                )
        if scene.expected_length is not None:
            measured = ego.total_length
            if abs(measured - scene.expected_length) > 0.01 * scene.expected_length:
                warn(
                    scene.name,
                    "length-deviation",
                    f"measured ego path length {measured:.1f} m deviates more than "
                    f"1% from expected {scene.expected_length:.1f} m",
                )
        for trig in scene.speed_limits:
            if trig.limit > 70.0:
                warn(
                    scene.name,
                    "limit-unreachable",
                    f"speed limit {trig.id} of {trig.limit:.1f} m/s exceeds any "
                    "plausible vehicle top speed",
                )
    return report
