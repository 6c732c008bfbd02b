"""Live-session wire protocol.

Streams world state to connected clients and ingests driver inputs.
Messages are UTF-8 JSON, one per WebSocket text frame, so a browser can
speak the protocol natively. One driver client is allowed per session plus
any number of observers; the kernel stays authoritative, inputs are
applied at the next tick boundary, and state broadcasts never include
trigger geometry.
"""

from __future__ import annotations

import asyncio
import json
import time
from dataclasses import dataclass, field
from typing import Any

from . import telemetry as tm
from .engine import EngineConfig, SceneRunner, EGO_ID
from .scenario import Scenario
from .vehicle import ControlInput, ControlMode

PROTOCOL_VERSION = "torloop/1"

_STATE_MARKER = object()


def input_bridge(
    axes: dict[str, float], deadzone: float = 0.05
) -> ControlInput:
    """Map raw device axes to a clamped control triple.

    Linear curve with a symmetric deadzone: the live range outside the
    deadzone is rescaled to the full output range. Missing axes read as
    zero.
    """

    def shape(value: float, signed: bool) -> float:
        v = max(-1.0, min(1.0, value)) if signed else max(0.0, min(1.0, value))
        mag = abs(v)
        if mag <= deadzone:
            return 0.0
        out = (mag - deadzone) / (1.0 - deadzone)
        return out if v >= 0.0 else -out

    return ControlInput(
        throttle=shape(float(axes.get("throttle", 0.0)), signed=False),
        brake=shape(float(axes.get("brake", 0.0)), signed=False),
        steering=shape(float(axes.get("steering", 0.0)), signed=True),
    )


@dataclass
class _Client:
    ws: Any
    role: str
    queue: asyncio.Queue = field(default_factory=asyncio.Queue)
    latest_state: dict | None = None
    state_pending: bool = False
    closed: bool = False

    def push(self, msg: dict) -> None:
        if not self.closed:
            self.queue.put_nowait(msg)

    def push_state(self, msg: dict) -> None:
        # Coalesce under backpressure: latest state wins, never reordered
        # against older states.
        self.latest_state = msg
        if not self.state_pending and not self.closed:
            self.state_pending = True
            self.queue.put_nowait(_STATE_MARKER)


class LiveSession:
    """One experiment run served over WebSocket."""

    def __init__(
        self,
        scenario: Scenario,
        config: EngineConfig,
        out_dir: str,
        pace: bool = True,
        scene_names: list[str] | None = None,
    ) -> None:
        self.scenario = scenario
        self.config = config
        self.out_dir = out_dir
        self.pace = pace
        self.scene_names = scene_names or [s.name for s in scenario.scenes]
        self.run_id = tm.new_run_id()
        self.clients: list[_Client] = []
        self.driver: _Client | None = None
        self._driver_connected = asyncio.Event()
        self._latest_input: ControlInput | None = None
        self._latest_input_tick: int | None = None
        self.finished = asyncio.Event()
        self.summaries: dict[str, tm.SceneSummary] = {}
        self.dropped_ticks = 0
        self._current_scene_msg: dict | None = None

    # -- connection handling ----------------------------------------------

    async def handle_client(self, ws) -> None:
        try:
            raw = await ws.recv()
            hello = json.loads(raw)
        except Exception:
            await ws.close()
            return
        if (
            not isinstance(hello, dict)
            or hello.get("type") != "hello"
            or hello.get("version") != PROTOCOL_VERSION
        ):
            await ws.send(
                json.dumps(
                    {
                        "type": "error",
                        "code": "version-mismatch",
                        "text": f"server speaks {PROTOCOL_VERSION}",
                    }
                )
            )
            await ws.close()
            return
        role = hello.get("role", "observer")
        if role not in ("driver", "observer"):
            role = "observer"
        if role == "driver" and self.driver is not None:
            await ws.send(
                json.dumps(
                    {
                        "type": "error",
                        "code": "driver-taken",
                        "text": "a driver is already connected",
                    }
                )
            )
            await ws.close()
            return
        client = _Client(ws=ws, role=role)
        self.clients.append(client)
        if role == "driver":
            self.driver = client
            self._driver_connected.set()
        client.push(
            {
                "type": "hello",
                "version": PROTOCOL_VERSION,
                "role": role,
                "scenario": self.scenario.name,
                "scenes": self.scene_names,
            }
        )
        if self._current_scene_msg is not None:
            client.push(self._current_scene_msg)
        sender = asyncio.create_task(self._sender(client))
        try:
            async for raw in ws:
                self._on_message(client, raw)
        except Exception:
            pass
        finally:
            client.closed = True
            sender.cancel()
            if client in self.clients:
                self.clients.remove(client)
            if client is self.driver:
                self.driver = None
                self._driver_connected.clear()
                self._broadcast({"type": "fade", "on": True})

    async def _sender(self, client: _Client) -> None:
        try:
            while True:
                item = await client.queue.get()
                if item is _STATE_MARKER:
                    client.state_pending = False
                    msg = client.latest_state
                    if msg is None:
                        continue
                else:
                    msg = item
                await client.ws.send(json.dumps(msg, separators=(",", ":")))
        except asyncio.CancelledError:
            raise
        except Exception:
            client.closed = True

    def _on_message(self, client: _Client, raw: str | bytes) -> None:
        try:
            msg = json.loads(raw)
            if not isinstance(msg, dict):
                raise ValueError("message must be an object")
            mtype = msg["type"]
        except (ValueError, KeyError):
            client.push(
                {"type": "error", "code": "malformed", "text": "malformed message"}
            )
            return
        if mtype == "input" and client.role == "driver":
            try:
                self._latest_input = ControlInput(
                    float(msg.get("throttle", 0.0)),
                    float(msg.get("brake", 0.0)),
                    float(msg.get("steering", 0.0)),
                ).clamped()
                self._latest_input_tick = int(msg.get("tick", -1))
            except (ValueError, TypeError):
                client.push(
                    {"type": "error", "code": "malformed", "text": "bad input values"}
                )

    def _broadcast(self, msg: dict) -> None:
        for client in list(self.clients):
            client.push(msg)

    def _broadcast_state(self, msg: dict) -> None:
        for client in list(self.clients):
            client.push_state(msg)

    # -- engine loop -------------------------------------------------------

    def _scene_message(self, runner: SceneRunner) -> dict:
        scene = runner.scene
        roads = []
        for spline in scene.paths.values():
            step = 5.0
            n = max(2, int(spline.total_length / step) + 1)
            pts = []
            for i in range(n):
                s = spline.total_length * i / (n - 1)
                (x, y, _z), _ = spline.point_at_distance_fast(s)
                pts.append([round(x, 2), round(y, 2)])
            roads.append(pts)
        objects = []
        for obj in scene.objects:
            center = obj.shape.center
            objects.append(
                {
                    "id": obj.id,
                    "tag": obj.tag.value,
                    "position": [center.x, center.y, center.z],
                }
            )
        return {
            "type": "scene",
            "name": scene.name,
            "roads": roads,
            "objects": objects,
        }

    def _state_message(self, runner: SceneRunner, tor: dict | None) -> dict:
        agents = [
            {
                "id": car.spawn.id,
                "kind": "AiCar",
                "position": [car.state.x, car.state.y, car.state.z],
                "heading": car.state.heading,
                "speed": car.state.speed,
            }
            for car in runner.cars
            if not car.done
        ] + [
            {
                "id": w.spawn.id,
                "kind": "Pedestrian",
                "position": [w.state.x, w.state.y, w.state.z],
                "heading": w.state.heading,
                "speed": w.spawn.cruise_speed,
            }
            for w in runner.walkers
        ]
        return {
            "type": "state",
            "tick": runner.tick - 1,
            "ego": {
                "id": EGO_ID,
                "position": [runner.ego.x, runner.ego.y, runner.ego.z],
                "heading": runner.ego.heading,
                "speed": runner.ego.speed,
                "mode": runner.ego.control_mode.value,
            },
            "agents": agents,
            "tor": tor,
            "fade": runner.fade,
        }

    async def run(self) -> None:
        """Drive the experiment; returns when all scenes are finished."""
        loop = asyncio.get_running_loop()
        dt = 1.0 / self.config.tick_rate
        by_name = {s.name: s for s in self.scenario.scenes}
        try:
            for name in self.scene_names:
                runner = SceneRunner(
                    self.scenario, by_name[name], self.config, self.run_id
                )
                self._current_scene_msg = self._scene_message(runner)
                self._broadcast(self._current_scene_msg)
                active_tor: dict | None = None
                t0 = time.monotonic()
                next_tick_at = loop.time()
                while not runner.done:
                    if self.driver is None:
                        # Engine pauses while no driver is connected.
                        await self._driver_connected.wait()
                        next_tick_at = loop.time()
                    result = runner.step(self._latest_input, None)
                    for event in result.events:
                        if event["type"] == "tor":
                            active_tor = {
                                "zone_id": event["zone_id"],
                                "budget": event["budget"],
                                "critical_objects": event["critical_objects"],
                                "issued_tick": event["tick"],
                            }
                            self._broadcast(
                                {
                                    "type": "tor",
                                    "zone_id": event["zone_id"],
                                    "budget": event["budget"],
                                    "critical_objects": event["critical_objects"],
                                }
                            )
                        elif event["type"] == "fade":
                            self._broadcast(
                                {"type": "fade", "on": event["on"]}
                            )
                            if event["on"]:
                                active_tor = None
                    if (
                        active_tor is not None
                        and runner.ego.control_mode is ControlMode.AUTOMATED
                    ):
                        active_tor = None
                    self._broadcast_state(self._state_message(runner, active_tor))
                    if self.pace:
                        next_tick_at += dt
                        delay = next_tick_at - loop.time()
                        if delay > 0.0:
                            await asyncio.sleep(delay)
                        else:
                            if delay < -dt:
                                # Behind by more than a tick: count the drop
                                # and correct drift without skipping sim time.
                                self.dropped_ticks += 1
                                next_tick_at = loop.time()
                    else:
                        await asyncio.sleep(0)
                summary = runner.summary(round(time.monotonic() - t0, 6))
                self.summaries[name] = summary
                tm.finalize_scene(runner.store, summary, self.out_dir)
                tm.record_inputs(
                    f"{self.out_dir}/{self.run_id}_{name}.inputs.jsonl",
                    runner.input_log,
                )
                self._broadcast(
                    {
                        "type": "scene_end",
                        "scene": name,
                        "failures": summary.failures,
                        "zones": [z.to_obj() for z in summary.zones],
                    }
                )
        finally:
            self.finished.set()


async def serve(
    scenario: Scenario,
    config: EngineConfig,
    out_dir: str,
    host: str = "127.0.0.1",
    port: int = 8700,
    pace: bool = True,
):
    """Bind the endpoint and run the session; returns (session, ws server)."""
    import websockets

    session = LiveSession(scenario, config, out_dir, pace=pace)
    server = await websockets.serve(session.handle_client, host, port)
    runner_task = asyncio.create_task(session.run())
    return session, server, runner_task
