"""Per-tick telemetry store, scene summaries, and replayable input logs.

Scene files are canonical JSON (sorted keys, shortest round-trip float
text) so a replayed run can be compared byte for byte against the
original. One file per scene per run, named `<run_id>_<scene>.json`.
"""

from __future__ import annotations

import json
import os
import uuid
from dataclasses import dataclass, field
from typing import Any, Iterable

from .vehicle import ControlInput

SCHEMA_VERSION = 1

# Base columns every frame record carries; extensions are declared per store.
BASE_COLUMNS = {
    "tick": int,
    "sim_time": float,
    "position": list,
    "heading": float,
    "speed": float,
    "control_mode": str,
    "throttle": float,
    "brake": float,
    "steering": float,
    "gaze": (dict, type(None)),
    "active_zone": (str, type(None)),
}


class OrderingError(ValueError):
    pass


class SchemaError(ValueError):
    pass


def new_run_id(rng=None) -> str:
    """Canonical hex-with-hyphens 128-bit run identifier."""
    if rng is None:
        return str(uuid.uuid4())
    return str(uuid.UUID(int=rng.getrandbits(128), version=4))


@dataclass
class ZoneOutcome:
    zone_id: str
    phase: str
    takeover_time: float | None
    critical: bool

    def to_obj(self) -> dict[str, Any]:
        return {
            "zone_id": self.zone_id,
            "phase": self.phase,
            "takeover_time": self.takeover_time,
            "critical": self.critical,
        }


@dataclass
class SceneSummary:
    scene: str
    run_id: str
    failures: int
    zones: list[ZoneOutcome]
    tick_count: int
    wall_clock_s: float | None = None

    def to_obj(self) -> dict[str, Any]:
        return {
            "scene": self.scene,
            "run_id": self.run_id,
            "failures": self.failures,
            "zones": [z.to_obj() for z in self.zones],
            "tick_count": self.tick_count,
            "wall_clock_s": self.wall_clock_s,
        }


class FrameStore:
    """In-memory frame buffer with a declared, extensible column schema."""

    def __init__(self, extra_columns: dict[str, type] | None = None) -> None:
        self.columns: dict[str, Any] = dict(BASE_COLUMNS)
        for name, typ in (extra_columns or {}).items():
            if name in self.columns:
                raise SchemaError(f"column {name!r} shadows a base column")
            self.columns[name] = typ
        self._frames: list[dict[str, Any]] = []
        self._last_tick: int | None = None

    def __len__(self) -> int:
        return len(self._frames)

    @property
    def frames(self) -> list[dict[str, Any]]:
        return self._frames

    def append(self, record: dict[str, Any]) -> None:
        tick = record.get("tick")
        if not isinstance(tick, int):
            raise SchemaError("record needs an integer tick")
        if self._last_tick is not None and tick <= self._last_tick:
            raise OrderingError(
                f"tick {tick} not after last stored tick {self._last_tick}"
            )
        for key in record:
            if key not in self.columns:
                raise SchemaError(f"undeclared column {key!r}")
        self._frames.append(record)
        self._last_tick = tick


def _canonical_dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def finalize_scene(
    store: FrameStore, summary: SceneSummary, out_dir: str
) -> str:
    """Write `<run_id>_<scene>.json` atomically; returns the file path."""
    doc = {
        "version": SCHEMA_VERSION,
        "run_id": summary.run_id,
        "scene": summary.scene,
        "summary": summary.to_obj(),
        "frames": store.frames,
    }
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"{summary.run_id}_{summary.scene}.json")
    tmp = path + ".tmp"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(_canonical_dumps(doc))
            fh.write("\n")
        os.replace(tmp, path)
    except OSError:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    return path


def load_scene(path: str) -> tuple[FrameStore, SceneSummary]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    summary_obj = doc["summary"]
    summary = SceneSummary(
        scene=summary_obj["scene"],
        run_id=summary_obj["run_id"],
        failures=summary_obj["failures"],
        zones=[
            ZoneOutcome(
                z["zone_id"], z["phase"], z["takeover_time"], z["critical"]
            )
            for z in summary_obj["zones"]
        ],
        tick_count=summary_obj["tick_count"],
        wall_clock_s=summary_obj["wall_clock_s"],
    )
    store = FrameStore(_infer_extra_columns(doc["frames"]))
    for frame in doc["frames"]:
        store.append(frame)
    return store, summary


def _infer_extra_columns(frames: list[dict[str, Any]]) -> dict[str, type]:
    extra: dict[str, type] = {}
    for frame in frames:
        for key, value in frame.items():
            if key not in BASE_COLUMNS and key not in extra:
                extra[key] = type(value)
    return extra


# --- input logs (one JSON object per line) --------------------------------


class InputLogError(ValueError):
    pass


def record_inputs(path: str, inputs: Iterable[tuple[int, ControlInput]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tick, inp in inputs:
            fh.write(
                _canonical_dumps(
                    {
                        "tick": tick,
                        "throttle": inp.throttle,
                        "brake": inp.brake,
                        "steering": inp.steering,
                    }
                )
            )
            fh.write("\n")


def load_inputs(path: str) -> list[tuple[int, ControlInput]]:
    out: list[tuple[int, ControlInput]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                out.append(
                    (
                        int(obj["tick"]),
                        ControlInput(
                            float(obj["throttle"]),
                            float(obj["brake"]),
                            float(obj["steering"]),
                        ),
                    )
                )
            except (ValueError, KeyError, TypeError) as exc:
                raise InputLogError(f"line {lineno}: {exc}") from exc
    return out


# --- run manifest ---------------------------------------------------------
#
# Run-level metadata lives outside the scene files so a replay can
# reproduce them byte for byte: the run id, the scenario hash, and the
# wall-clock duration measured for each scene.


def write_manifest(out_dir: str, manifest: dict[str, Any]) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "run.json")
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(_canonical_dumps(manifest))
        fh.write("\n")
    os.replace(tmp, path)
    return path


def load_manifest(out_dir: str) -> dict[str, Any]:
    with open(os.path.join(out_dir, "run.json"), encoding="utf-8") as fh:
        return json.load(fh)
