"""Fixed-step world simulation and experiment management.

One logical tick advances the world through a fixed phase order: resolve
the ego input, step ego and agents (committed in agent-id order), test
triggers against the new positions, apply event commands (takeover handoff
is same-tick, respawn takes effect for the next tick), cast gaze, and
append the frame record. Given the same scenario, seed, input stream, and
eye stream, two runs produce byte-identical telemetry.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from . import events as ev
from . import gaze as gz
from . import telemetry as tm
from . import traffic as tf
from .geometry import (
    BoxShape,
    ColliderShape,
    ColliderTag,
    SphereShape,
    TriggerKind,
    Vec3,
    volume_contains,
)
from .scenario import AgentSpawn, Scenario, SceneSpec
from .vehicle import (
    DT,
    TICK_RATE_HZ,
    ControlInput,
    ControlMode,
    VehicleParams,
    VehicleState,
    ZERO_INPUT,
    step_vehicle,
)

EGO_ID = "ego"
EGO_COLLIDER_HEIGHT = 1.5


class EngineError(RuntimeError):
    pass


class ReplayMismatch(EngineError):
    def __init__(self, expected: str, actual: str) -> None:
        super().__init__(
            f"log/scenario mismatch: recorded hash {expected}, current hash {actual}"
        )
        self.expected = expected
        self.actual = actual


@dataclass(frozen=True)
class EngineConfig:
    tick_rate: int = TICK_RATE_HZ
    mode: str = "headless"            # "headless" | "live"
    seed: int | None = None           # None: take the scenario's seed
    max_scene_s: float | None = None  # override scene max_duration_s
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    ego_policy: tf.FollowPolicy = field(default_factory=tf.FollowPolicy)

    def __post_init__(self) -> None:
        if self.tick_rate <= 0:
            raise ValueError("tick_rate must be positive")
        if self.mode not in ("headless", "live"):
            raise ValueError(f"unknown mode {self.mode!r}")


class ScriptedDriver:
    """Deterministic stand-in for the human driver in headless runs.

    Emits zero input until reaction_s after the takeover notice, then runs
    the chosen style: "brake" holds full brake, "steer" performs an
    open-loop dodge around the conflict, "none" never responds.
    """

    STYLES = ("brake", "steer", "none")

    def __init__(self, reaction_s: float, style: str = "brake") -> None:
        if style not in self.STYLES:
            raise ValueError(f"unknown driver style {style!r}")
        if reaction_s < 0.0:
            raise ValueError("reaction time must be non-negative")
        self.reaction_s = reaction_s
        self.style = style
        self._tor_tick: int | None = None

    def notify(self, events: list[dict[str, Any]]) -> None:
        for event in events:
            if event["type"] == "tor" and self._tor_tick is None:
                self._tor_tick = event["tick"]
            elif event["type"] == "respawn":
                self._tor_tick = None

    def control(self, tick: int) -> ControlInput:
        if self.style == "none" or self._tor_tick is None:
            return ZERO_INPUT
        respond_at = self._tor_tick + math.ceil(self.reaction_s * TICK_RATE_HZ)
        if tick < respond_at:
            return ZERO_INPUT
        if self.style == "brake":
            return ControlInput(0.0, 1.0, 0.0)
        # Open-loop dodge: swerve out, swerve back, then coast straight.
        dt_s = (tick - respond_at) / TICK_RATE_HZ
        if dt_s < 0.75:
            return ControlInput(0.2, 0.0, 0.5)
        if dt_s < 1.5:
            return ControlInput(0.2, 0.0, -0.5)
        return ControlInput(0.2, 0.0, 0.0)

    def reset(self) -> None:
        self._tor_tick = None

    def spec_string(self) -> str:
        return f"scripted:rt={self.reaction_s},style={self.style}"


@dataclass
class _VehicleAgent:
    spawn: AgentSpawn
    state: VehicleState
    s: float
    target: tf.SpeedTarget
    inside_limits: set[str] = field(default_factory=set)
    done: bool = False


@dataclass
class _Walker:
    spawn: AgentSpawn
    state: tf.PedestrianState


@dataclass
class TickResult:
    tick: int
    events: list[dict[str, Any]]
    record: dict[str, Any]
    done: bool


def _vehicle_collider(vid: str, state: VehicleState, params: VehicleParams) -> ColliderShape:
    return ColliderShape(
        vid,
        BoxShape(
            center=Vec3(state.x, state.y, state.z + EGO_COLLIDER_HEIGHT / 2.0),
            half_extents=Vec3(
                params.length / 2.0, params.width / 2.0, EGO_COLLIDER_HEIGHT / 2.0
            ),
            yaw=state.heading,
        ),
        ColliderTag.VEHICLE,
    )


def _walker_collider(wid: str, state: tf.PedestrianState) -> ColliderShape:
    return ColliderShape(
        wid,
        SphereShape(Vec3(state.x, state.y, state.z + 0.9), 0.4),
        ColliderTag.PEDESTRIAN,
    )


class SceneRunner:
    """Owns the world state of one scene and advances it tick by tick."""

    def __init__(
        self,
        scenario: Scenario,
        scene: SceneSpec,
        config: EngineConfig,
        run_id: str,
        extra_columns: dict[str, type] | None = None,
    ) -> None:
        self.scenario = scenario
        self.scene = scene
        self.config = config
        self.run_id = run_id
        self.params = config.vehicle
        self.tick = 0
        self.done = False
        self.end_reason: str | None = None
        self.store = tm.FrameStore(extra_columns)
        self.input_log: list[tuple[int, ControlInput]] = []
        self.gaze_records: list[gz.GazeRecord] = []

        path = scene.ego_path
        pos, tan = path.point_at_distance(scene.ego_start_s)
        self.ego = VehicleState(
            x=pos.x, y=pos.y, z=pos.z,
            heading=math.atan2(tan.y, tan.x),
            speed=0.0,
            control_mode=ControlMode.AUTOMATED,
        )
        self.ego_s = scene.ego_start_s
        self.ego_target = tf.SpeedTarget(scene.default_speed_limit)
        self.ego_inside_limits: set[str] = set()
        self.fade = False
        self.dropped_ticks = 0

        self.zones = [ev.EventZoneState(spec) for spec in scene.event_zones]
        self.cars: list[_VehicleAgent] = []
        for spawn in sorted(scene.traffic, key=lambda a: a.id):
            p, t = scene.paths[spawn.path_name].point_at_distance(spawn.start_s)
            self.cars.append(
                _VehicleAgent(
                    spawn=spawn,
                    state=VehicleState(
                        x=p.x, y=p.y, z=p.z,
                        heading=math.atan2(t.y, t.x),
                        speed=spawn.cruise_speed,
                    ),
                    s=spawn.start_s,
                    target=tf.SpeedTarget(spawn.cruise_speed),
                )
            )
        self.walkers: list[_Walker] = []
        for spawn in sorted(scene.pedestrians, key=lambda a: a.id):
            p, t = scene.paths[spawn.path_name].point_at_distance(spawn.start_s)
            self.walkers.append(
                _Walker(
                    spawn,
                    tf.PedestrianState(
                        s=spawn.start_s, x=p.x, y=p.y, z=p.z,
                        heading=math.atan2(t.y, t.x),
                    ),
                )
            )

        # Arc length of each scene object along the ego path, for
        # time-to-conflict classification at takeover issuance.
        self._object_s: dict[str, float] = {}
        for obj in scene.objects:
            center = obj.shape.center
            s_obj, _ = path.project_to_path(center)
            self._object_s[obj.id] = s_obj
        self._speed_limit_index = [
            (t.id, t.volume, t.limit, path.project_to_path(t.volume.center)[0])
            for t in scene.speed_limits
        ]
        self._max_ticks = int(
            (config.max_scene_s if config.max_scene_s is not None
             else scene.max_duration_s) * config.tick_rate
        )

    # -- lead detection ----------------------------------------------------

    def _lead_for(self, path_name: str, s: float) -> tf.LeadInfo:
        best_s = math.inf
        best_speed = 0.0
        for car in self.cars:
            if car.spawn.path_name == path_name and not car.done and car.s > s:
                if car.s < best_s:
                    best_s = car.s
                    best_speed = car.state.speed
        if path_name == self.scene.ego_path_name and self.ego_s > s:
            if self.ego_s < best_s:
                best_s = self.ego_s
                best_speed = self.ego.speed
        if math.isinf(best_s):
            return tf.NO_LEAD
        gap = max(0.0, best_s - s - self.params.length)
        return tf.LeadInfo(present=True, gap=gap, lead_speed=best_speed)

    # -- tick --------------------------------------------------------------

    def step(
        self,
        external_input: ControlInput | None = None,
        eye: gz.EyeSample | None = None,
    ) -> TickResult:
        if self.done:
            raise EngineError("scene already finished")
        scene = self.scene
        params = self.params
        tick = self.tick
        emitted: list[dict[str, Any]] = []

        # 1. resolve ego input
        manual = self.ego.control_mode is ControlMode.MANUAL
        if manual:
            applied = (external_input or ZERO_INPUT).clamped()
            self.input_log.append((tick, applied))
            for i, zone in enumerate(self.zones):
                self.zones[i] = ev.record_first_input(zone, applied, tick)
        else:
            lead = self._lead_for(scene.ego_path_name, self.ego_s)
            cmd = tf.ai_drive(
                self.ego, scene.ego_path, self.ego_s, self.ego_target,
                lead, self.config.ego_policy, params,
            )
            applied = cmd.control

        # 2. step ego and agents; compute from the previous snapshot,
        #    commit in agent-id order.
        new_ego = step_vehicle(self.ego, applied, params, DT)
        new_ego_s = self._advance_s(
            scene.ego_path, self.ego_s, self.ego, new_ego
        )
        car_updates: list[tuple[_VehicleAgent, VehicleState, float, bool]] = []
        for car in self.cars:
            if car.done:
                car_updates.append((car, car.state, car.s, True))
                continue
            spath = scene.paths[car.spawn.path_name]
            lead = self._lead_for(car.spawn.path_name, car.s)
            cmd = tf.ai_drive(
                car.state, spath, car.s, car.target, lead,
                car.spawn.follow_policy or tf.FollowPolicy(), params,
            )
            nstate = step_vehicle(car.state, cmd.control, params, DT)
            ns = self._advance_s(spath, car.s, car.state, nstate)
            done = cmd.end_of_path and nstate.speed < 0.05
            car_updates.append((car, nstate, ns, done))
        self.ego = new_ego
        self.ego_s = new_ego_s
        for car, nstate, ns, done in car_updates:
            car.state = nstate
            car.s = ns
            car.done = done
        for walker in self.walkers:
            walker.state = tf.step_pedestrian(
                scene.paths[walker.spawn.path_name], walker.state,
                walker.spawn.cruise_speed, DT, walker.spawn.loop,
            )

        # 3. trigger tests against the new positions
        ego_col = _vehicle_collider(EGO_ID, self.ego, params)
        self.ego_target, self.ego_inside_limits = tf.apply_speed_limit(
            self.ego_target, ego_col, self.ego_inside_limits,
            self._speed_limit_index,
        )
        for car in self.cars:
            if car.done:
                continue
            col = _vehicle_collider(car.spawn.id, car.state, params)
            car.target, car.inside_limits = tf.apply_speed_limit(
                car.target, col, car.inside_limits, self._speed_limit_index
            )
        commands: list[object] = []
        for i, zone in enumerate(self.zones):
            for kind, volumes in (
                (TriggerKind.START_GATE, (zone.spec.start_gate,)),
                (TriggerKind.BOUNDARY, zone.spec.boundaries),
                (TriggerKind.END_GATE, (zone.spec.end_gate,)),
            ):
                hit = any(volume_contains(v, ego_col) for v in volumes)
                if hit:
                    new_zone, cmds = ev.on_trigger_contact(self.zones[i], kind, tick)
                    self.zones[i] = new_zone
                    commands.extend(cmds)

        # 4. apply event commands
        for cmd in commands:
            if isinstance(cmd, ev.TorNotice):
                self.ego = self.ego.with_mode(ControlMode.MANUAL)
                idx = next(
                    i for i, z in enumerate(self.zones)
                    if z.spec.id == cmd.zone_id
                )
                ttc = self._time_to_conflict(self.zones[idx].spec)
                self.zones[idx] = ev.replace(
                    self.zones[idx], time_to_conflict_s=ttc
                )
                emitted.append(
                    {
                        "type": "tor",
                        "tick": tick,
                        "zone_id": cmd.zone_id,
                        "budget": cmd.budget,
                        "critical_objects": list(cmd.critical_objects),
                    }
                )
            elif isinstance(cmd, ev.RespawnCommand):
                self.ego = VehicleState(
                    x=cmd.position.x, y=cmd.position.y, z=cmd.position.z,
                    heading=cmd.heading, speed=0.0,
                    control_mode=ControlMode.AUTOMATED,
                )
                self.ego_s = cmd.s_on_path
                self.fade = True
                emitted.append(
                    {"type": "fade", "tick": tick, "on": True}
                )
                emitted.append(
                    {"type": "respawn", "tick": tick, "zone_id": cmd.zone_id}
                )
        if self.fade and not any(c["type"] == "fade" for c in emitted):
            # fade clears one tick after the respawn was broadcast
            self.fade = False
            emitted.append({"type": "fade", "tick": tick, "on": False})

        # 5. gaze
        gaze_obj: dict[str, Any] | None = None
        if eye is not None:
            colliders = list(scene.objects)
            colliders.append(ego_col)
            for car in self.cars:
                if not car.done:
                    colliders.append(
                        _vehicle_collider(car.spawn.id, car.state, params)
                    )
            for walker in self.walkers:
                colliders.append(_walker_collider(walker.spawn.id, walker.state))
            record = gz.gaze_cast(eye, colliders)
            self.gaze_records.append(record)
            gaze_obj = {
                "hits": [[h[0], h[1]] for h in record.hits],
                "valid": record.ray is not None,
            }

        # 6. frame record
        active_zone = next(
            (z.spec.id for z in self.zones if z.phase is ev.ZonePhase.ACTIVE),
            None,
        )
        if not (
            math.isfinite(self.ego.x)
            and math.isfinite(self.ego.y)
            and math.isfinite(self.ego.speed)
        ):
            raise EngineError(f"non-finite ego state at tick {tick}")
        record = {
            "tick": tick,
            "sim_time": tick / self.config.tick_rate,
            "position": [self.ego.x, self.ego.y, self.ego.z],
            "heading": self.ego.heading,
            "speed": self.ego.speed,
            "control_mode": self.ego.control_mode.value,
            "throttle": applied.throttle,
            "brake": applied.brake,
            "steering": applied.steering,
            "gaze": gaze_obj,
            "active_zone": active_zone,
        }
        self.store.append(record)
        self.tick += 1
        if self.ego_s >= scene.ego_path.total_length - 0.5:
            self.done = True
            self.end_reason = "path-end"
        elif self.tick >= self._max_ticks:
            self.done = True
            self.end_reason = "time-limit"
        result = TickResult(tick, emitted, record, self.done)
        return result

    def _advance_s(
        self,
        path,
        s_prev: float,
        old: VehicleState,
        new: VehicleState,
    ) -> float:
        # Project the position delta onto the local tangent; exact enough
        # for near-path travel and far cheaper than a full projection.
        (_, _, _), (tx, ty, _tz) = path.point_at_distance_fast(s_prev)
        ds = tx * (new.x - old.x) + ty * (new.y - old.y)
        return min(max(s_prev + ds, 0.0), path.total_length)

    def _time_to_conflict(self, spec: ev.EventZoneSpec) -> float | None:
        if self.ego.speed <= 0.01:
            return None
        best: float | None = None
        for oid in spec.critical_objects:
            s_obj = self._object_s.get(oid)
            if s_obj is None:
                continue
            dist = s_obj - self.ego_s
            if dist <= 0.0:
                continue
            ttc = dist / self.ego.speed
            if best is None or ttc < best:
                best = ttc
        return best

    # -- scene wrap-up -----------------------------------------------------

    def summary(self, wall_clock_s: float | None = None) -> tm.SceneSummary:
        zones = [
            tm.ZoneOutcome(
                zone_id=z.spec.id,
                phase=z.phase.value,
                takeover_time=ev.takeover_time(z, self.config.tick_rate),
                critical=ev.is_critical(z),
            )
            for z in self.zones
        ]
        failures = sum(1 for z in self.zones if z.phase is ev.ZonePhase.FAILED)
        return tm.SceneSummary(
            scene=self.scene.name,
            run_id=self.run_id,
            failures=failures,
            zones=zones,
            tick_count=self.tick,
            wall_clock_s=wall_clock_s,
        )


# --- experiment management ------------------------------------------------

PHASE_EYE_CALIBRATION = "EyeCalibration"
PHASE_EYE_VALIDATION = "EyeValidation"
PHASE_SEAT_CALIBRATION = "SeatCalibration"
PHASE_TEST_SCENE = "TestScene"
PHASE_MAIN_SCENES = "MainScenes"

DEFAULT_PHASES = (
    PHASE_EYE_CALIBRATION,
    PHASE_EYE_VALIDATION,
    PHASE_SEAT_CALIBRATION,
    PHASE_TEST_SCENE,
    PHASE_MAIN_SCENES,
)


@dataclass(frozen=True)
class ExperimentPlan:
    phases: tuple[str, ...] = DEFAULT_PHASES
    test_scene: str | None = None
    main_scenes: tuple[str, ...] | None = None  # None: all scenario scenes

    def __post_init__(self) -> None:
        if PHASE_MAIN_SCENES in self.phases and PHASE_EYE_VALIDATION in self.phases:
            if self.phases.index(PHASE_EYE_VALIDATION) > self.phases.index(
                PHASE_MAIN_SCENES
            ):
                raise ValueError("eye validation must precede the main scenes")
        counts = {p: self.phases.count(p) for p in self.phases}
        if any(c > 1 for c in counts.values()):
            raise ValueError("each phase runs exactly once")


class ValidationFailed(EngineError):
    def __init__(self, result: gz.ValidationResult) -> None:
        super().__init__(
            f"eye validation failed: mean error {result.mean_error_deg:.2f} deg, "
            f"head displacement {result.max_head_displacement:.3f} m"
        )
        self.result = result


@dataclass
class RunArtifacts:
    run_id: str
    out_dir: str
    scene_files: dict[str, str]
    input_logs: dict[str, str]
    validation: gz.ValidationResult | None
    phase_log: list[str]
    summaries: dict[str, tm.SceneSummary]


def _scene_input_provider(
    driver: ScriptedDriver | None,
    replay_inputs: dict[int, ControlInput] | None,
) -> Callable[[int], ControlInput | None]:
    if replay_inputs is not None:
        return lambda tick: replay_inputs.get(tick)
    if driver is not None:
        return driver.control
    return lambda tick: None


def run_scene(
    scenario: Scenario,
    scene: SceneSpec,
    config: EngineConfig,
    run_id: str,
    driver: ScriptedDriver | None = None,
    replay_inputs: dict[int, ControlInput] | None = None,
    eye_by_tick: dict[int, gz.EyeSample] | None = None,
) -> SceneRunner:
    """Run one scene to completion (headless) and return the runner."""
    runner = SceneRunner(scenario, scene, config, run_id)
    provider = _scene_input_provider(driver, replay_inputs)
    while not runner.done:
        tick = runner.tick
        eye = eye_by_tick.get(tick) if eye_by_tick else None
        result = runner.step(provider(tick), eye)
        if driver is not None:
            driver.notify(result.events)
    return runner


def run_experiment(
    scenario: Scenario,
    config: EngineConfig,
    out_dir: str,
    driver: ScriptedDriver | None = None,
    plan: ExperimentPlan | None = None,
    validation_samples: list[gz.EyeSample] | None = None,
    eye_by_tick: dict[int, gz.EyeSample] | None = None,
    force: bool = False,
    run_id: str | None = None,
    wall_clocks: dict[str, float] | None = None,
    replay_inputs_by_scene: dict[str, dict[int, ControlInput]] | None = None,
) -> RunArtifacts:
    """Execute the full experiment flow and write all run artifacts.

    Calibration phases are explicit no-op placeholders that only produce
    log entries; eye validation must pass before the main scenes unless
    force is set. Each main scene writes one telemetry file plus one input
    log, all sharing the run id.
    """
    plan = plan or ExperimentPlan()
    if run_id is None:
        run_id = tm.new_run_id()
    phase_log: list[str] = []
    validation: gz.ValidationResult | None = None
    scene_files: dict[str, str] = {}
    input_logs: dict[str, str] = {}
    summaries: dict[str, tm.SceneSummary] = {}

    for phase in plan.phases:
        if phase == PHASE_EYE_CALIBRATION:
            phase_log.append("EyeCalibration: no-op placeholder (hardware procedure)")
        elif phase == PHASE_SEAT_CALIBRATION:
            phase_log.append("SeatCalibration: no-op placeholder (hardware procedure)")
        elif phase == PHASE_EYE_VALIDATION:
            if validation_samples:
                target = Vec3(0.0, 5.0, 1.7)
                validation = gz.validate_fixation(validation_samples, target)
                phase_log.append(
                    f"EyeValidation: mean error {validation.mean_error_deg:.3f} deg, "
                    f"passed={validation.passed}"
                )
                if not validation.passed and not force:
                    _write_manifest(
                        out_dir, scenario, config, run_id, driver,
                        scene_files, input_logs, wall_clocks or {}, phase_log,
                        aborted=True,
                    )
                    raise ValidationFailed(validation)
            else:
                phase_log.append("EyeValidation: skipped (no eye stream provided)")
        elif phase == PHASE_TEST_SCENE:
            if plan.test_scene is not None:
                phase_log.append(f"TestScene: {plan.test_scene}")
            else:
                phase_log.append("TestScene: none configured")
        elif phase == PHASE_MAIN_SCENES:
            names = (
                list(plan.main_scenes)
                if plan.main_scenes is not None
                else [s.name for s in scenario.scenes]
            )
            by_name = {s.name: s for s in scenario.scenes}
            for name in names:
                if name not in by_name:
                    raise EngineError(f"plan references unknown scene {name!r}")
                scene = by_name[name]
                t0 = time.monotonic()
                replay_inputs = (
                    replay_inputs_by_scene.get(name)
                    if replay_inputs_by_scene
                    else None
                )
                if driver is not None:
                    driver.reset()
                runner = run_scene(
                    scenario, scene, config, run_id,
                    driver=driver, replay_inputs=replay_inputs,
                    eye_by_tick=eye_by_tick,
                )
                wall = (
                    wall_clocks.get(name)
                    if wall_clocks and name in wall_clocks
                    else round(time.monotonic() - t0, 6)
                )
                summary = runner.summary(wall)
                scene_files[name] = tm.finalize_scene(runner.store, summary, out_dir)
                log_path = os.path.join(out_dir, f"{run_id}_{name}.inputs.jsonl")
                tm.record_inputs(log_path, runner.input_log)
                input_logs[name] = log_path
                summaries[name] = summary
                phase_log.append(
                    f"MainScene {name}: {runner.tick} ticks, "
                    f"failures={summary.failures}, end={runner.end_reason}"
                )
    _write_manifest(
        out_dir, scenario, config, run_id, driver,
        scene_files, input_logs,
        {name: s.wall_clock_s for name, s in summaries.items()},
        phase_log,
    )
    return RunArtifacts(
        run_id=run_id,
        out_dir=out_dir,
        scene_files=scene_files,
        input_logs=input_logs,
        validation=validation,
        phase_log=phase_log,
        summaries=summaries,
    )


def _write_manifest(
    out_dir, scenario, config, run_id, driver,
    scene_files, input_logs, wall_clocks, phase_log, aborted=False,
) -> None:
    tm.write_manifest(
        out_dir,
        {
            "run_id": run_id,
            "scenario_name": scenario.name,
            "scenario_hash": scenario.content_hash(),
            "seed": config.seed if config.seed is not None else scenario.seed,
            "tick_rate": config.tick_rate,
            "max_scene_s": config.max_scene_s,
            "driver": driver.spec_string() if driver else None,
            "scenes": {
                name: {
                    "telemetry": os.path.basename(path),
                    "inputs": os.path.basename(input_logs[name]),
                    "wall_clock_s": wall_clocks.get(name),
                }
                for name, path in scene_files.items()
            },
            "phase_log": phase_log,
            "aborted": aborted,
        },
    )


def replay_run(
    scenario: Scenario,
    config: EngineConfig,
    recorded_dir: str,
    out_dir: str,
    eye_by_tick: dict[int, gz.EyeSample] | None = None,
) -> RunArtifacts:
    """Re-run a recorded session from its input logs.

    The recorded manifest's scenario hash must match the given scenario;
    the original run id and wall-clock figures are reused so the telemetry
    files come out byte-identical.
    """
    manifest = tm.load_manifest(recorded_dir)
    current_hash = scenario.content_hash()
    if manifest["scenario_hash"] != current_hash:
        raise ReplayMismatch(manifest["scenario_hash"], current_hash)
    recorded_seed = manifest["seed"]
    config_seed = config.seed if config.seed is not None else scenario.seed
    if recorded_seed != config_seed:
        raise ReplayMismatch(str(recorded_seed), str(config_seed))
    if manifest["tick_rate"] != config.tick_rate:
        raise ReplayMismatch(str(manifest["tick_rate"]), str(config.tick_rate))
    if manifest.get("max_scene_s") != config.max_scene_s:
        raise ReplayMismatch(
            str(manifest.get("max_scene_s")), str(config.max_scene_s)
        )

    replay_inputs: dict[str, dict[int, ControlInput]] = {}
    wall_clocks: dict[str, float] = {}
    scene_names = []
    for name, entry in manifest["scenes"].items():
        scene_names.append(name)
        log_path = os.path.join(recorded_dir, entry["inputs"])
        replay_inputs[name] = dict(tm.load_inputs(log_path))
        if entry.get("wall_clock_s") is not None:
            wall_clocks[name] = entry["wall_clock_s"]
    plan = ExperimentPlan(main_scenes=tuple(scene_names))
    return run_experiment(
        scenario,
        config,
        out_dir,
        driver=None,
        plan=plan,
        eye_by_tick=eye_by_tick,
        run_id=manifest["run_id"],
        wall_clocks=wall_clocks,
        replay_inputs_by_scene=replay_inputs,
    )
