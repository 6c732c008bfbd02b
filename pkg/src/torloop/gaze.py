"""Gaze-ray combination, fixation validation, and per-tick gaze casting.

Live eye-tracker hardware is replaced by a replayable sample stream; the
math contract stays the same: combine both eyes into one ray, measure
angular error against a fixation target, and cast the ray recording every
object it passes through.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .geometry import ColliderShape, Ray, Vec3, ray_all_hits

DEFAULT_ERROR_THRESHOLD_DEG = 1.0
# The head-displacement criterion is quoted as 2" in the source material;
# both readings (inches / centimeters) are selectable.
HEAD_THRESHOLD_INCHES_M = 0.0508
HEAD_THRESHOLD_CM_M = 0.02
DEFAULT_HEAD_THRESHOLD_M = HEAD_THRESHOLD_CM_M


class InvalidSampleError(ValueError):
    pass


@dataclass(frozen=True)
class EyeSample:
    tick: int
    left_origin: Vec3
    left_dir: Vec3
    right_origin: Vec3
    right_dir: Vec3
    head_position: Vec3
    left_valid: bool = True
    right_valid: bool = True


@dataclass(frozen=True)
class GazeRecord:
    tick: int
    ray: Ray | None                      # None marks a no-gaze sample
    hits: tuple[tuple[str, float], ...]  # (object id, distance), near to far


@dataclass(frozen=True)
class ValidationResult:
    mean_error_deg: float
    max_head_displacement: float
    passed: bool


def combine_eyes(sample: EyeSample) -> Ray | None:
    """Single gaze ray from both eyes; one-eye fallback; None if both invalid."""
    if sample.left_valid and sample.right_valid:
        origin = (sample.left_origin + sample.right_origin).scale(0.5)
        mean_dir = sample.left_dir + sample.right_dir
        return Ray(origin, mean_dir.normalized())
    if sample.left_valid:
        return Ray(sample.left_origin, sample.left_dir.normalized())
    if sample.right_valid:
        return Ray(sample.right_origin, sample.right_dir.normalized())
    return None


def angular_error(direction: Vec3, target_dir: Vec3) -> float:
    """Angle between two unit vectors, degrees in [0, 180]."""
    d = min(max(direction.dot(target_dir), -1.0), 1.0)
    return math.degrees(math.acos(d))


def validate_fixation(
    samples: Sequence[EyeSample],
    target: Vec3,
    error_threshold_deg: float = DEFAULT_ERROR_THRESHOLD_DEG,
    head_threshold_m: float = DEFAULT_HEAD_THRESHOLD_M,
    aggregate: str = "mean",
) -> ValidationResult:
    """Score a fixation-cross window.

    Error per sample is the angle between the combined gaze direction and
    the direction to the target; head displacement is measured from the
    first sample's head position. aggregate is "mean" (default) or "max".
    """
    if not samples:
        raise InvalidSampleError("validation needs at least one sample")
    if aggregate not in ("mean", "max"):
        raise InvalidSampleError(f"unknown aggregate {aggregate!r}")
    errors: list[float] = []
    head_ref = samples[0].head_position
    max_disp = 0.0
    for sample in samples:
        ray = combine_eyes(sample)
        if ray is None:
            continue
        to_target = (target - ray.origin).normalized()
        errors.append(angular_error(ray.direction, to_target))
        max_disp = max(max_disp, (sample.head_position - head_ref).norm())
    if not errors:
        raise InvalidSampleError("no combinable samples in validation window")
    if aggregate == "mean":
        err = sum(errors) / len(errors)
    else:
        err = max(errors)
    passed = err <= error_threshold_deg and max_disp <= head_threshold_m
    return ValidationResult(err, max_disp, passed)


def gaze_cast(sample: EyeSample, colliders: Iterable[ColliderShape]) -> GazeRecord:
    """Cast the combined gaze ray, recording every object along it."""
    ray = combine_eyes(sample)
    if ray is None:
        return GazeRecord(sample.tick, None, ())
    hits = ray_all_hits(ray, colliders)
    return GazeRecord(sample.tick, ray, tuple((h.id, h.distance) for h in hits))


# --- replay file I/O (one JSON record per line) ---------------------------


def _vec(v: Vec3) -> list[float]:
    return [v.x, v.y, v.z]


def sample_to_json(sample: EyeSample) -> str:
    return json.dumps(
        {
            "tick": sample.tick,
            "left_origin": _vec(sample.left_origin),
            "left_dir": _vec(sample.left_dir),
            "right_origin": _vec(sample.right_origin),
            "right_dir": _vec(sample.right_dir),
            "head_position": _vec(sample.head_position),
            "left_valid": sample.left_valid,
            "right_valid": sample.right_valid,
        },
        sort_keys=True,
        separators=(",", ":"),
    )


def sample_from_json(line: str) -> EyeSample:
    obj = json.loads(line)
    return EyeSample(
        tick=int(obj["tick"]),
        left_origin=Vec3(*obj["left_origin"]),
        left_dir=Vec3(*obj["left_dir"]),
        right_origin=Vec3(*obj["right_origin"]),
        right_dir=Vec3(*obj["right_dir"]),
        head_position=Vec3(*obj["head_position"]),
        left_valid=bool(obj.get("left_valid", True)),
        right_valid=bool(obj.get("right_valid", True)),
    )


def write_samples(path: str, samples: Iterable[EyeSample]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(sample_to_json(sample) + "\n")


def read_samples(path: str) -> list[EyeSample]:
    out: list[EyeSample] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                out.append(sample_from_json(line))
            except (ValueError, KeyError, TypeError) as exc:
                raise InvalidSampleError(f"line {lineno}: {exc}") from exc
    return out


def synthetic_fixation_stream(
    n: int,
    target: Vec3,
    head: Vec3,
    error_deg: float = 0.0,
    start_tick: int = 0,
) -> list[EyeSample]:
    """Deterministic eye stream aimed at target with a fixed angular error.

    The error is applied as a rotation of the gaze direction about the
    vertical axis, so the per-sample angular error equals error_deg.
    """
    samples: list[EyeSample] = []
    left = head + Vec3(-0.032, 0.0, 0.0)
    right = head + Vec3(0.032, 0.0, 0.0)
    for i in range(n):
        tick = start_tick + i
        mid = (left + right).scale(0.5)
        d = (target - mid).normalized()
        a = math.radians(error_deg)
        # Rotate about z; assumes a mostly horizontal gaze direction.
        dx = d.x * math.cos(a) - d.y * math.sin(a)
        dy = d.x * math.sin(a) + d.y * math.cos(a)
        dirv = Vec3(dx, dy, d.z).normalized()
        samples.append(
            EyeSample(
                tick=tick,
                left_origin=left,
                left_dir=dirv,
                right_origin=right,
                right_dir=dirv,
                head_position=head,
            )
        )
    return samples
