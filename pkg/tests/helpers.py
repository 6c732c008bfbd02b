"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import json
import math

from torloop.geometry import BezierSegment, PathSpline, Vec3
from torloop.scenario import polyline_to_segments


def straight_path(length: float = 100.0, n_points: int = 5) -> PathSpline:
    pts = [Vec3(length * i / (n_points - 1), 0.0, 0.0) for i in range(n_points)]
    return PathSpline(polyline_to_segments(pts))


def curved_segment() -> BezierSegment:
    return BezierSegment(
        Vec3(0, 0, 0), Vec3(0, 2, 0), Vec3(2, 2, 0), Vec3(2, 0, 0)
    )


def de_casteljau(seg: BezierSegment, t: float) -> Vec3:
    """Independent Bezier evaluation by recursive subdivision."""
    pts = [seg.p0, seg.p1, seg.p2, seg.p3]
    while len(pts) > 1:
        pts = [
            Vec3(
                (1 - t) * a.x + t * b.x,
                (1 - t) * a.y + t * b.y,
                (1 - t) * a.z + t * b.z,
            )
            for a, b in zip(pts, pts[1:])
        ]
    return pts[0]


def dense_polyline_length(seg: BezierSegment, samples: int = 100_000) -> float:
    from torloop.geometry import bezier_eval

    total = 0.0
    prev = bezier_eval(seg, 0.0)
    for i in range(1, samples + 1):
        cur = bezier_eval(seg, i / samples)
        total += (cur - prev).norm()
        prev = cur
    return total


def one_event_scenario(
    speed_kmh: float = 50.0,
    gate_s: float = 300.0,
    conflict_gap: float = 110.0,
    length: float = 1000.0,
    max_duration_s: float = 120.0,
    tor_budget: float = 10.0,
) -> str:
    """One straight scene with a single critical event zone, as JSON text."""
    v = speed_kmh / 3.6
    obstacle_s = gate_s + conflict_gap
    end_s = obstacle_s + 50.0
    doc = {
        "version": 1,
        "name": "one-event",
        "seed": 7,
        "scenes": [
            {
                "name": "main",
                "max_duration_s": max_duration_s,
                "default_speed_limit": v,
                "paths": {"ego": {"points": [[0, 0, 0], [length / 2, 0, 0], [length, 0, 0]]}},
                "ego_path": "ego",
                "ego_start_s": 0.0,
                "objects": [
                    {
                        "id": "stalled_car",
                        "tag": "CriticalObject",
                        "shape": {
                            "type": "box",
                            "center": [obstacle_s, 0.0, 0.75],
                            "half_extents": [2.3, 1.0, 0.75],
                        },
                    }
                ],
                "event_zones": [
                    {
                        "id": "zone_1",
                        "start_gate": {
                            "center": [gate_s, 0.0, 1.0],
                            "half_extents": [1.5, 9.0, 2.5],
                        },
                        "end_gate": {
                            "center": [end_s, 0.0, 1.0],
                            "half_extents": [1.5, 9.0, 2.5],
                        },
                        "boundaries": [
                            {
                                "center": [obstacle_s, 0.0, 1.0],
                                "half_extents": [2.8, 1.5, 2.0],
                            }
                        ],
                        "respawn": {
                            "position": [end_s + 40.0, 0.0, 0.0],
                            "heading": 0.0,
                            "s_on_path": end_s + 40.0,
                        },
                        "critical_objects": ["stalled_car"],
                        "tor_budget": tor_budget,
                    }
                ],
            }
        ],
    }
    return json.dumps(doc)
