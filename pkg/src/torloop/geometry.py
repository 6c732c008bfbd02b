"""Splines, trigger volumes, and ray casting.

All positions are meters in a right-handed frame: x/y is the ground plane,
z points up. Paths are piecewise cubic Bezier curves with a sampled
arc-length table so agents can be driven at constant speed without
iterative root finding inside the tick loop.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class DomainError(ValueError):
    """Argument outside the documented domain of an operation."""


class DegenerateTangentError(ValueError):
    """Bezier derivative vanished where a tangent was requested."""


@dataclass(frozen=True)
class Vec3:
    x: float
    y: float
    z: float

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scale(self, k: float) -> "Vec3":
        return Vec3(self.x * k, self.y * k, self.z * k)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def cross(self, other: "Vec3") -> "Vec3":
        return Vec3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def normalized(self) -> "Vec3":
        n = self.norm()
        if n == 0.0:
            raise DegenerateTangentError("cannot normalize zero vector")
        return Vec3(self.x / n, self.y / n, self.z / n)

    def is_finite(self) -> bool:
        return (
            math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)
        )

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class BezierSegment:
    """Cubic Bezier segment defined by four control points."""

    p0: Vec3
    p1: Vec3
    p2: Vec3
    p3: Vec3

    def __post_init__(self) -> None:
        for p in (self.p0, self.p1, self.p2, self.p3):
            if not p.is_finite():
                raise DomainError("non-finite control point")

    def is_degenerate(self) -> bool:
        return self.p0 == self.p1 == self.p2 == self.p3


def bezier_eval(seg: BezierSegment, t: float) -> Vec3:
    """Evaluate the cubic Bernstein combination of the control points."""
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t={t} outside [0, 1]")
    u = 1.0 - t
    b0 = u * u * u
    b1 = 3.0 * u * u * t
    b2 = 3.0 * u * t * t
    b3 = t * t * t
    return Vec3(
        b0 * seg.p0.x + b1 * seg.p1.x + b2 * seg.p2.x + b3 * seg.p3.x,
        b0 * seg.p0.y + b1 * seg.p1.y + b2 * seg.p2.y + b3 * seg.p3.y,
        b0 * seg.p0.z + b1 * seg.p1.z + b2 * seg.p2.z + b3 * seg.p3.z,
    )


def bezier_derivative(seg: BezierSegment, t: float) -> Vec3:
    """First derivative of the cubic at t (not normalized)."""
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t={t} outside [0, 1]")
    u = 1.0 - t
    d0 = (seg.p1 - seg.p0).scale(3.0 * u * u)
    d1 = (seg.p2 - seg.p1).scale(6.0 * u * t)
    d2 = (seg.p3 - seg.p2).scale(3.0 * t * t)
    return d0 + d1 + d2


def bezier_tangent(seg: BezierSegment, t: float) -> Vec3:
    """Unit tangent at t; raises DegenerateTangentError on a zero derivative."""
    d = bezier_derivative(seg, t)
    if d.norm() < 1e-12:
        raise DegenerateTangentError(f"zero derivative at t={t}")
    return d.normalized()


class PathSpline:
    """Piecewise cubic Bezier path with an arc-length lookup table.

    The table stores (parameter, cumulative length) pairs at a fixed number
    of samples per segment; arc-length queries interpolate linearly between
    table entries. C0 continuity between segments is enforced to 1e-6 m.
    """

    def __init__(
        self,
        segments: Sequence[BezierSegment],
        samples_per_segment: int = 256,
    ) -> None:
        if not segments:
            raise DomainError("spline needs at least one segment")
        for i, seg in enumerate(segments):
            if seg.is_degenerate():
                raise DomainError(f"degenerate segment {i} (all control points equal)")
        for i in range(len(segments) - 1):
            gap = (segments[i + 1].p0 - segments[i].p3).norm()
            if gap > 1e-6:
                raise DomainError(
                    f"discontinuity of {gap:.3e} m between segments {i} and {i + 1}"
                )
        self.segments = list(segments)
        self.samples_per_segment = samples_per_segment
        # Power-basis coefficients per segment per axis for fast evaluation.
        self._coef: list[tuple[tuple[float, float, float, float], ...]] = []
        for seg in self.segments:
            axes = []
            for p0, p1, p2, p3 in zip(
                seg.p0.as_tuple(), seg.p1.as_tuple(), seg.p2.as_tuple(), seg.p3.as_tuple()
            ):
                c0 = p0
                c1 = 3.0 * (p1 - p0)
                c2 = 3.0 * (p0 - 2.0 * p1 + p2)
                c3 = p3 - 3.0 * p2 + 3.0 * p1 - p0
                axes.append((c0, c1, c2, c3))
            self._coef.append(tuple(axes))
        self._build_arc_table()

    def _build_arc_table(self) -> None:
        n = self.samples_per_segment
        s_values = [0.0]
        prev = self._eval_fast(0, 0.0)
        total = 0.0
        for seg_idx in range(len(self.segments)):
            if seg_idx > 0:
                prev = self._eval_fast(seg_idx, 0.0)
            for i in range(1, n + 1):
                t = i / n
                cur = self._eval_fast(seg_idx, t)
                dx = cur[0] - prev[0]
                dy = cur[1] - prev[1]
                dz = cur[2] - prev[2]
                total += math.sqrt(dx * dx + dy * dy + dz * dz)
                s_values.append(total)
                prev = cur
        for a, b in zip(s_values, s_values[1:]):
            if b <= a:
                raise DomainError("arc table not strictly increasing (stalled segment)")
        self._arc = s_values
        self.total_length = total
        if self.total_length <= 0.0:
            raise DomainError("spline has zero length")

    def _eval_fast(self, seg_idx: int, t: float) -> tuple[float, float, float]:
        cx, cy, cz = self._coef[seg_idx]
        return (
            ((cx[3] * t + cx[2]) * t + cx[1]) * t + cx[0],
            ((cy[3] * t + cy[2]) * t + cy[1]) * t + cy[0],
            ((cz[3] * t + cz[2]) * t + cz[1]) * t + cz[0],
        )

    def _tangent_fast(self, seg_idx: int, t: float) -> tuple[float, float, float]:
        cx, cy, cz = self._coef[seg_idx]
        dx = (3.0 * cx[3] * t + 2.0 * cx[2]) * t + cx[1]
        dy = (3.0 * cy[3] * t + 2.0 * cy[2]) * t + cy[1]
        dz = (3.0 * cz[3] * t + 2.0 * cz[2]) * t + cz[1]
        n = math.sqrt(dx * dx + dy * dy + dz * dz)
        if n < 1e-12:
            # Fall back to a nudged parameter; only hit on tangent-degenerate knots.
            eps = 1e-6
            t2 = min(max(t + eps, 0.0), 1.0) if t < 0.5 else t - eps
            dx2 = (3.0 * cx[3] * t2 + 2.0 * cx[2]) * t2 + cx[1]
            dy2 = (3.0 * cy[3] * t2 + 2.0 * cy[2]) * t2 + cy[1]
            dz2 = (3.0 * cz[3] * t2 + 2.0 * cz[2]) * t2 + cz[1]
            n = math.sqrt(dx2 * dx2 + dy2 * dy2 + dz2 * dz2)
            if n < 1e-12:
                raise DegenerateTangentError("zero derivative along segment")
            return (dx2 / n, dy2 / n, dz2 / n)
        return (dx / n, dy / n, dz / n)

    def _locate(self, s: float) -> tuple[int, float]:
        """Map arc length to (segment index, local parameter t)."""
        n = self.samples_per_segment
        idx = bisect_right(self._arc, s) - 1
        idx = min(max(idx, 0), len(self._arc) - 2)
        s0 = self._arc[idx]
        s1 = self._arc[idx + 1]
        frac = 0.0 if s1 == s0 else (s - s0) / (s1 - s0)
        seg_idx, local = divmod(idx, n)
        t = (local + frac) / n
        return seg_idx, min(max(t, 0.0), 1.0)

    def point_at_distance(self, s: float) -> tuple[Vec3, Vec3]:
        """Position and unit tangent at cumulative arc length s."""
        if s < 0.0:
            if abs(s) < 1e-9:
                s = 0.0
            else:
                raise DomainError(f"s={s} below 0")
        if s > self.total_length:
            if s - self.total_length < 1e-9:
                s = self.total_length
            else:
                raise DomainError(f"s={s} beyond total length {self.total_length}")
        seg_idx, t = self._locate(s)
        p = self._eval_fast(seg_idx, t)
        d = self._tangent_fast(seg_idx, t)
        return Vec3(*p), Vec3(*d)

    def point_at_distance_fast(
        self, s: float
    ) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
        """Tuple-returning variant of point_at_distance for the tick path."""
        s = min(max(s, 0.0), self.total_length)
        seg_idx, t = self._locate(s)
        return self._eval_fast(seg_idx, t), self._tangent_fast(seg_idx, t)

    def _ground_dist2(self, seg_idx: int, t: float, px: float, py: float) -> float:
        q = self._eval_fast(seg_idx, t)
        dx = q[0] - px
        dy = q[1] - py
        return dx * dx + dy * dy

    def project_to_path(
        self,
        p: Vec3,
        s_hint: float | None = None,
        window: float | None = None,
    ) -> tuple[float, float]:
        """Arc length and signed lateral offset of the nearest spline point.

        Distances are measured in the ground plane. Lateral is positive to
        the left of the local tangent. Ties resolve toward smaller s. When
        s_hint/window are given only that arc-length range is searched,
        which keeps per-tick tracking cheap.
        """
        px, py = p.x, p.y
        coarse = 64
        best = (math.inf, 0, 0.0)  # (dist2, seg_idx, t)
        if s_hint is not None:
            w = window if window is not None else 25.0
            lo = max(0.0, s_hint - w)
            hi = min(self.total_length, s_hint + w)
            steps = max(8, int((hi - lo) / 0.5))
            for i in range(steps + 1):
                s = lo + (hi - lo) * i / steps
                seg_idx, t = self._locate(s)
                d2 = self._ground_dist2(seg_idx, t, px, py)
                if d2 < best[0] - 1e-15:
                    best = (d2, seg_idx, t)
        else:
            for seg_idx in range(len(self.segments)):
                for i in range(coarse + 1):
                    t = i / coarse
                    d2 = self._ground_dist2(seg_idx, t, px, py)
                    if d2 < best[0] - 1e-15:
                        best = (d2, seg_idx, t)
        seg_idx = best[1]
        span = 1.0 / (coarse if s_hint is None else 8)
        a = max(0.0, best[2] - span)
        b = min(1.0, best[2] + span)
        # Golden-section refinement; deterministic iteration count.
        c = b - _GOLDEN * (b - a)
        d = a + _GOLDEN * (b - a)
        fc = self._ground_dist2(seg_idx, c, px, py)
        fd = self._ground_dist2(seg_idx, d, px, py)
        for _ in range(40):
            if fc <= fd:
                b, d, fd = d, c, fc
                c = b - _GOLDEN * (b - a)
                fc = self._ground_dist2(seg_idx, c, px, py)
            else:
                a, c, fc = c, d, fd
                d = a + _GOLDEN * (b - a)
                fd = self._ground_dist2(seg_idx, d, px, py)
        t = (a + b) / 2.0
        s = self._arc_length_at(seg_idx, t)
        q = self._eval_fast(seg_idx, t)
        tan = self._tangent_fast(seg_idx, t)
        lateral = tan[0] * (py - q[1]) - tan[1] * (px - q[0])
        return s, lateral

    def _arc_length_at(self, seg_idx: int, t: float) -> float:
        n = self.samples_per_segment
        pos = t * n
        i = min(int(pos), n - 1)
        frac = pos - i
        idx = seg_idx * n + i
        return self._arc[idx] + frac * (self._arc[idx + 1] - self._arc[idx])


class TriggerKind(Enum):
    START_GATE = "StartGate"
    BOUNDARY = "Boundary"
    END_GATE = "EndGate"
    SPEED_LIMIT = "SpeedLimit"
    CUSTOM = "Custom"


@dataclass(frozen=True)
class TriggerVolume:
    """Yaw-oriented box used as an invisible contact trigger."""

    center: Vec3
    half_extents: Vec3
    yaw: float
    kind: TriggerKind

    def __post_init__(self) -> None:
        if min(self.half_extents.x, self.half_extents.y, self.half_extents.z) <= 0.0:
            raise DomainError("half extents must be strictly positive")
        if not -math.pi <= self.yaw <= math.pi:
            raise DomainError("yaw must lie in [-pi, pi]")


class ColliderTag(Enum):
    VEHICLE = "Vehicle"
    PEDESTRIAN = "Pedestrian"
    SCENE_OBJECT = "SceneObject"
    CRITICAL_OBJECT = "CriticalObject"


@dataclass(frozen=True)
class BoxShape:
    center: Vec3
    half_extents: Vec3
    yaw: float

    def __post_init__(self) -> None:
        if min(self.half_extents.x, self.half_extents.y, self.half_extents.z) <= 0.0:
            raise DomainError("half extents must be strictly positive")


@dataclass(frozen=True)
class SphereShape:
    center: Vec3
    radius: float

    def __post_init__(self) -> None:
        if self.radius <= 0.0:
            raise DomainError("radius must be strictly positive")


@dataclass(frozen=True)
class ColliderShape:
    id: str
    shape: BoxShape | SphereShape
    tag: ColliderTag


@dataclass(frozen=True)
class Ray:
    origin: Vec3
    direction: Vec3

    def __post_init__(self) -> None:
        if abs(self.direction.norm() - 1.0) > 1e-9:
            raise DomainError("ray direction must be a unit vector")


@dataclass(frozen=True)
class RayHit:
    id: str
    distance: float
    point: Vec3


def _ray_sphere_entry(ray: Ray, center: Vec3, radius: float) -> float | None:
    oc = ray.origin - center
    b = oc.dot(ray.direction)
    c = oc.dot(oc) - radius * radius
    disc = b * b - c
    if disc < 0.0:
        return None
    sq = math.sqrt(disc)
    t0 = -b - sq
    t1 = -b + sq
    if t1 < 0.0:
        return None
    return max(t0, 0.0)


def _ray_box_entry(ray: Ray, box: BoxShape) -> float | None:
    # Work in the box frame: rotate by -yaw about z.
    cy = math.cos(box.yaw)
    sy = math.sin(box.yaw)
    rel = ray.origin - box.center
    ox = cy * rel.x + sy * rel.y
    oy = -sy * rel.x + cy * rel.y
    oz = rel.z
    dx = cy * ray.direction.x + sy * ray.direction.y
    dy = -sy * ray.direction.x + cy * ray.direction.y
    dz = ray.direction.z
    t_near = -math.inf
    t_far = math.inf
    for o, d, h in (
        (ox, dx, box.half_extents.x),
        (oy, dy, box.half_extents.y),
        (oz, dz, box.half_extents.z),
    ):
        if abs(d) < 1e-15:
            if abs(o) > h:
                return None
            continue
        t0 = (-h - o) / d
        t1 = (h - o) / d
        if t0 > t1:
            t0, t1 = t1, t0
        t_near = max(t_near, t0)
        t_far = min(t_far, t1)
        if t_near > t_far:
            return None
    if t_far < 0.0:
        return None
    return max(t_near, 0.0)


def ray_all_hits(ray: Ray, colliders: Iterable[ColliderShape]) -> list[RayHit]:
    """All colliders intersected by the ray, nearest first.

    Every intersected collider is reported, not just the closest, so
    objects occluding each other are all recorded. Ties in distance are
    broken by collider id for determinism.
    """
    hits: list[RayHit] = []
    for col in colliders:
        if isinstance(col.shape, SphereShape):
            t = _ray_sphere_entry(ray, col.shape.center, col.shape.radius)
        else:
            t = _ray_box_entry(ray, col.shape)
        if t is not None:
            point = ray.origin + ray.direction.scale(t)
            hits.append(RayHit(col.id, t, point))
    hits.sort(key=lambda h: (h.distance, h.id))
    return hits


def _obb_sphere_overlap(box: BoxShape, center: Vec3, radius: float) -> bool:
    cy = math.cos(box.yaw)
    sy = math.sin(box.yaw)
    rel = center - box.center
    lx = cy * rel.x + sy * rel.y
    ly = -sy * rel.x + cy * rel.y
    lz = rel.z
    qx = min(max(lx, -box.half_extents.x), box.half_extents.x)
    qy = min(max(ly, -box.half_extents.y), box.half_extents.y)
    qz = min(max(lz, -box.half_extents.z), box.half_extents.z)
    dx = lx - qx
    dy = ly - qy
    dz = lz - qz
    return dx * dx + dy * dy + dz * dz <= radius * radius + 1e-12


def _box_corners_2d(box: BoxShape) -> list[tuple[float, float]]:
    cy = math.cos(box.yaw)
    sy = math.sin(box.yaw)
    hx, hy = box.half_extents.x, box.half_extents.y
    corners = []
    for ex, ey in ((hx, hy), (hx, -hy), (-hx, hy), (-hx, -hy)):
        corners.append(
            (box.center.x + cy * ex - sy * ey, box.center.y + sy * ex + cy * ey)
        )
    return corners


def _obb_obb_overlap(a: BoxShape, b: BoxShape) -> bool:
    # Yaw-only boxes are z-aligned prisms: 2D SAT in the ground plane
    # plus a z interval check is exact.
    if abs(a.center.z - b.center.z) > a.half_extents.z + b.half_extents.z + 1e-12:
        return False
    ca = _box_corners_2d(a)
    cb = _box_corners_2d(b)
    for yaw in (a.yaw, b.yaw):
        for ax, ay in (
            (math.cos(yaw), math.sin(yaw)),
            (-math.sin(yaw), math.cos(yaw)),
        ):
            mins_a = min(ax * x + ay * y for x, y in ca)
            maxs_a = max(ax * x + ay * y for x, y in ca)
            mins_b = min(ax * x + ay * y for x, y in cb)
            maxs_b = max(ax * x + ay * y for x, y in cb)
            if mins_a > maxs_b + 1e-12 or mins_b > maxs_a + 1e-12:
                return False
    return True


def volume_contains(vol: TriggerVolume, shape: ColliderShape) -> bool:
    """Contact test: does the shape overlap the trigger's oriented box?"""
    box = BoxShape(vol.center, vol.half_extents, vol.yaw)
    if isinstance(shape.shape, SphereShape):
        return _obb_sphere_overlap(box, shape.shape.center, shape.shape.radius)
    return _obb_obb_overlap(box, shape.shape)
