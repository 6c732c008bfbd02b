import json

import pytest

from torloop.geometry import PathSpline, Vec3
from torloop.scenario import (
    ScenarioSyntaxError,
    SchemaViolation,
    UnknownReference,
    load_scenario,
    parse_scenario,
    polyline_to_segments,
    serialize_scenario,
    validate_scenario,
)

from helpers import dense_polyline_length, one_event_scenario


MINIMAL = {
    "version": 1,
    "name": "minimal",
    "seed": 1,
    "scenes": [
        {
            "name": "only",
            "paths": {"road": {"points": [[0, 0, 0], [50, 0, 0], [100, 0, 0]]}},
            "ego_path": "road",
        }
    ],
}


def doc(**overrides):
    out = json.loads(json.dumps(MINIMAL))
    out.update(overrides)
    return out


class TestPolylineFitting:
    def test_interpolates_every_input_point(self):
        pts = [Vec3(0, 0, 0), Vec3(10, 5, 0), Vec3(20, -3, 1), Vec3(35, 0, 0)]
        segs = polyline_to_segments(pts)
        assert len(segs) == 3
        for seg, a, b in zip(segs, pts, pts[1:]):
            assert (seg.p0 - a).norm() < 1e-12
            assert (seg.p3 - b).norm() < 1e-12

    def test_straight_polyline_length(self):
        segs = polyline_to_segments(
            [Vec3(0, 0, 0), Vec3(50, 0, 0), Vec3(100, 0, 0)]
        )
        spline = PathSpline(segs)
        assert spline.total_length == pytest.approx(100.0, abs=1e-3)

    def test_segment_length_matches_dense_oracle(self):
        segs = polyline_to_segments(
            [Vec3(0, 0, 0), Vec3(30, 20, 0), Vec3(60, -10, 0), Vec3(100, 0, 0)]
        )
        spline = PathSpline(segs)
        oracle = sum(dense_polyline_length(s, 20_000) for s in segs)
        assert spline.total_length == pytest.approx(oracle, abs=1e-3)

    def test_too_few_points(self):
        with pytest.raises(Exception):
            polyline_to_segments([Vec3(0, 0, 0)])


class TestParsing:
    def test_minimal_document(self):
        sc = parse_scenario(json.dumps(MINIMAL))
        assert sc.name == "minimal"
        assert sc.seed == 1
        assert len(sc.scenes) == 1
        assert sc.scenes[0].ego_path.total_length == pytest.approx(100.0, abs=1e-3)

    def test_full_event_scene(self):
        sc = parse_scenario(one_event_scenario())
        scene = sc.scenes[0]
        assert len(scene.event_zones) == 1
        zone = scene.event_zones[0]
        assert zone.critical_objects == ("stalled_car",)
        assert zone.tor_budget == 10.0

    def test_syntax_error_carries_position(self):
        bad = '{"version": 1,\n "name": oops}'
        with pytest.raises(ScenarioSyntaxError) as exc:
            parse_scenario(bad)
        assert exc.value.line == 2

    def test_unsupported_version(self):
        with pytest.raises(SchemaViolation, match="version"):
            parse_scenario(json.dumps(doc(version=99)))

    def test_missing_scenes(self):
        with pytest.raises(SchemaViolation):
            parse_scenario(json.dumps(doc(scenes=[])))

    def test_unknown_ego_path_reference(self):
        d = doc()
        d["scenes"][0]["ego_path"] = "missing_road"
        with pytest.raises(UnknownReference) as exc:
            parse_scenario(json.dumps(d))
        assert exc.value.ref == "missing_road"

    def test_unknown_critical_object_reference(self):
        d = json.loads(one_event_scenario())
        d["scenes"][0]["event_zones"][0]["critical_objects"] = ["deer_1"]
        with pytest.raises(UnknownReference) as exc:
            parse_scenario(json.dumps(d))
        assert exc.value.ref == "deer_1"

    def test_traffic_path_reference_checked(self):
        d = doc()
        d["scenes"][0]["traffic"] = [
            {"id": "car", "path": "nope", "cruise_speed": 10.0}
        ]
        with pytest.raises(UnknownReference):
            parse_scenario(json.dumps(d))

    def test_duplicate_object_ids_rejected(self):
        d = doc()
        shape = {"type": "sphere", "center": [1, 0, 0], "radius": 0.5}
        d["scenes"][0]["objects"] = [
            {"id": "rock", "shape": shape},
            {"id": "rock", "shape": shape},
        ]
        with pytest.raises(SchemaViolation, match="duplicate"):
            parse_scenario(json.dumps(d))

    def test_duplicate_scene_names_rejected(self):
        d = doc()
        d["scenes"].append(json.loads(json.dumps(d["scenes"][0])))
        with pytest.raises(SchemaViolation, match="unique"):
            parse_scenario(json.dumps(d))

    def test_limit_kmh_converted(self):
        d = doc()
        d["scenes"][0]["speed_limits"] = [
            {
                "id": "t50",
                "volume": {"center": [50, 0, 1], "half_extents": [1, 5, 2]},
                "limit_kmh": 50.0,
            }
        ]
        sc = parse_scenario(json.dumps(d))
        assert sc.scenes[0].speed_limits[0].limit == pytest.approx(50.0 / 3.6)

    def test_bool_seed_rejected(self):
        with pytest.raises(SchemaViolation):
            parse_scenario(json.dumps(doc(seed=True)))


class TestSerialization:
    def test_round_trip_identity(self):
        sc = parse_scenario(one_event_scenario())
        text = serialize_scenario(sc)
        again = serialize_scenario(parse_scenario(text))
        assert again == text

    def test_content_hash_stable_and_sensitive(self):
        a = parse_scenario(one_event_scenario())
        b = parse_scenario(one_event_scenario())
        c = parse_scenario(one_event_scenario(tor_budget=5.0))
        assert a.content_hash() == b.content_hash()
        assert a.content_hash() != c.content_hash()

    def test_load_from_file(self, tmp_path):
        p = tmp_path / "sc.json"
        p.write_text(one_event_scenario())
        assert load_scenario(str(p)).name == "one-event"


class TestValidation:
    def test_clean_scenario_is_runnable(self):
        report = validate_scenario(parse_scenario(one_event_scenario()))
        assert report.runnable
        assert report.findings == []

    def test_respawn_not_after_event(self):
        d = json.loads(one_event_scenario())
        d["scenes"][0]["event_zones"][0]["respawn"]["s_on_path"] = 100.0
        report = validate_scenario(parse_scenario(json.dumps(d)))
        assert not report.runnable
        assert any(f.code == "respawn-not-after-event" for f in report.errors)

    def test_gate_order_error(self):
        d = json.loads(one_event_scenario())
        zone = d["scenes"][0]["event_zones"][0]
        zone["start_gate"], zone["end_gate"] = zone["end_gate"], zone["start_gate"]
        report = validate_scenario(parse_scenario(json.dumps(d)))
        assert any(f.code == "gate-order" for f in report.errors)

    def test_respawn_off_path(self):
        d = json.loads(one_event_scenario())
        d["scenes"][0]["event_zones"][0]["respawn"]["s_on_path"] = 5000.0
        report = validate_scenario(parse_scenario(json.dumps(d)))
        assert any(f.code == "respawn-off-path" for f in report.errors)

    def test_length_deviation_warning(self):
        d = json.loads(one_event_scenario())
        d["scenes"][0]["expected_length"] = 900.0
        report = validate_scenario(parse_scenario(json.dumps(d)))
        assert report.runnable
        assert any(f.code == "length-deviation" for f in report.warnings)

    def test_matching_expected_length_is_clean(self):
        d = json.loads(one_event_scenario())
        d["scenes"][0]["expected_length"] = 1000.0
        report = validate_scenario(parse_scenario(json.dumps(d)))
        assert report.findings == []

    def test_unreachable_limit_warning(self):
        d = json.loads(one_event_scenario())
        d["scenes"][0]["speed_limits"] = [
            {
                "id": "absurd",
                "volume": {"center": [100, 0, 1], "half_extents": [1, 5, 2]},
                "limit": 90.0,
            }
        ]
        report = validate_scenario(parse_scenario(json.dumps(d)))
        assert any(f.code == "limit-unreachable" for f in report.warnings)
