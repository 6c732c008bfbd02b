#!/usr/bin/env python3
"""Regenerate scenarios/four_scenes.json.

Builds four road scenes (mountain road 3400 m, city 1200 m, country road
2400 m, highway 3600 m) as polylines, scales each until its fitted spline
length matches the target, and drops one critical event zone plus traffic
and speed-limit triggers into each scene.
"""

from __future__ import annotations

import json
import math
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from torloop.geometry import PathSpline, Vec3  # noqa: E402
from torloop.scenario import polyline_to_segments  # noqa: E402

OUT = os.path.join(os.path.dirname(__file__), "..", "scenarios", "four_scenes.json")

KMH = 1.0 / 3.6


def build_polyline(length_x: float, amplitude: float, wavelength: float,
                   step: float = 25.0) -> list[list[float]]:
    pts = []
    x = 0.0
    while x < length_x + step / 2:
        y = amplitude * math.sin(2.0 * math.pi * x / wavelength) if amplitude else 0.0
        pts.append([x, y, 0.0])
        x += step
    return pts


def scale_to_length(points: list[list[float]], target: float) -> list[list[float]]:
    pts = points
    for _ in range(6):
        spline = PathSpline(polyline_to_segments([Vec3(*p) for p in pts]))
        factor = target / spline.total_length
        pts = [[p[0] * factor, p[1] * factor, p[2]] for p in pts]
        if abs(factor - 1.0) < 1e-6:
            break
    return [[round(p[0], 3), round(p[1], 3), round(p[2], 3)] for p in pts]


def offset_polyline(points: list[list[float]], offset: float) -> list[list[float]]:
    spline = PathSpline(polyline_to_segments([Vec3(*p) for p in points]))
    out = []
    for p in points:
        s, _ = spline.project_to_path(Vec3(*p))
        _, tan = spline.point_at_distance(min(s, spline.total_length))
        # left normal of the tangent in the ground plane
        out.append([round(p[0] - tan.y * offset, 3),
                    round(p[1] + tan.x * offset, 3), p[2]])
    return out


def gate(spline: PathSpline, s: float, half=(1.5, 9.0, 2.5)):
    pos, tan = spline.point_at_distance(s)
    return {
        "center": [round(pos.x, 3), round(pos.y, 3), 1.0],
        "half_extents": list(half),
        "yaw": round(math.atan2(tan.y, tan.x), 6),
    }


def make_scene(name: str, target_len: float, amplitude: float, wavelength: float,
               default_kmh: float, limits_kmh: list[tuple[float, float]],
               event_s: float, conflict_gap: float,
               with_pedestrians: bool = False) -> dict:
    ego_pts = scale_to_length(build_polyline(target_len, amplitude, wavelength),
                              target_len)
    ego = PathSpline(polyline_to_segments([Vec3(*p) for p in ego_pts]))
    paths = {"ego": {"points": ego_pts},
             "parallel": {"points": offset_polyline(ego_pts, 4.0)}}

    obstacle_s = event_s + conflict_gap
    obstacle_pos, obstacle_tan = ego.point_at_distance(obstacle_s)
    end_s = obstacle_s + 60.0
    respawn_s = end_s + 40.0
    respawn_pos, respawn_tan = ego.point_at_distance(respawn_s)
    obstacle_id = f"obstacle_{name}"

    scene = {
        "name": name,
        "expected_length": target_len,
        "default_speed_limit": round(default_kmh * KMH, 4),
        "max_duration_s": 300.0,
        "paths": paths,
        "ego_path": "ego",
        "ego_start_s": 0.0,
        "objects": [
            {
                "id": obstacle_id,
                "tag": "CriticalObject",
                "shape": {
                    "type": "box",
                    "center": [round(obstacle_pos.x, 3), round(obstacle_pos.y, 3), 0.75],
                    "half_extents": [2.3, 1.0, 0.75],
                    "yaw": round(math.atan2(obstacle_tan.y, obstacle_tan.x), 6),
                },
            }
        ],
        "traffic": [
            {
                "id": f"{name}_car_1",
                "path": "parallel",
                "start_s": 60.0,
                "cruise_speed": round(default_kmh * KMH, 4),
                "follow_policy": {"min_gap": 5.0, "time_headway": 1.5},
            },
            {
                "id": f"{name}_car_2",
                "path": "parallel",
                "start_s": 10.0,
                "cruise_speed": round(default_kmh * KMH * 1.1, 4),
                "follow_policy": {"min_gap": 5.0, "time_headway": 1.5},
            },
        ],
        "pedestrians": [],
        "speed_limits": [
            {
                "id": f"{name}_limit_{int(kmh)}",
                "volume": gate(ego, s, half=(2.0, 10.0, 2.5)),
                "limit_kmh": kmh,
            }
            for s, kmh in limits_kmh
        ],
        "event_zones": [
            {
                "id": f"{name}_event_1",
                "start_gate": gate(ego, event_s),
                "end_gate": gate(ego, end_s),
                "boundaries": [
                    {
                        "center": [round(obstacle_pos.x, 3), round(obstacle_pos.y, 3), 1.0],
                        "half_extents": [2.8, 1.5, 2.0],
                        "yaw": round(math.atan2(obstacle_tan.y, obstacle_tan.x), 6),
                    }
                ],
                "respawn": {
                    "position": [round(respawn_pos.x, 3), round(respawn_pos.y, 3), 0.0],
                    "heading": round(math.atan2(respawn_tan.y, respawn_tan.x), 6),
                    "s_on_path": round(respawn_s, 3),
                },
                "critical_objects": [obstacle_id],
                "tor_budget": 10.0,
            }
        ],
    }
    if with_pedestrians:
        scene["paths"]["sidewalk"] = {"points": offset_polyline(ego_pts, 8.0)}
        scene["pedestrians"] = [
            {"id": f"{name}_walker_1", "path": "sidewalk", "start_s": 0.0,
             "cruise_speed": 1.4, "loop": True},
            {"id": f"{name}_walker_2", "path": "sidewalk", "start_s": 200.0,
             "cruise_speed": 1.2, "loop": True},
        ]
    return scene


def main() -> None:
    doc = {
        "version": 1,
        "name": "four-scenes",
        "seed": 20260823,
        "scenes": [
            # curvy, low traffic, 30 km/h or slower up to 100 on straights
            make_scene("mountain_road", 3400.0, amplitude=70.0, wavelength=500.0,
                       default_kmh=60.0,
                       limits_kmh=[(400.0, 30.0), (900.0, 100.0), (2600.0, 50.0)],
                       event_s=1600.0, conflict_gap=135.0),
            # narrow low-speed streets, dense with walkers
            make_scene("city", 1200.0, amplitude=25.0, wavelength=420.0,
                       default_kmh=30.0,
                       limits_kmh=[(500.0, 30.0)],
                       event_s=600.0, conflict_gap=70.0,
                       with_pedestrians=True),
            # medium-high speed, long view distance
            make_scene("country_road", 2400.0, amplitude=45.0, wavelength=800.0,
                       default_kmh=70.0,
                       limits_kmh=[(1200.0, 70.0)],
                       event_s=1100.0, conflict_gap=160.0),
            # high speed, low to medium density
            make_scene("highway", 3600.0, amplitude=20.0, wavelength=1500.0,
                       default_kmh=100.0,
                       limits_kmh=[(1000.0, 100.0), (2800.0, 80.0)],
                       event_s=1800.0, conflict_gap=225.0),
        ],
    }
    with open(OUT, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
