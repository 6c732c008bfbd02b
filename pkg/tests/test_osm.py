import math

import pytest

from torloop.geometry import Vec3
from torloop.osm import (
    EARTH_RADIUS_M,
    OsmParseError,
    import_osm,
    ways_to_path_defs,
)


def osm_doc(nodes, ways):
    """nodes: [(id, lat, lon)]; ways: [(id, [refs], {tags})]."""
    parts = ["<osm version='0.6'>"]
    for nid, lat, lon in nodes:
        parts.append(f"<node id='{nid}' lat='{lat}' lon='{lon}'/>")
    for wid, refs, tags in ways:
        parts.append(f"<way id='{wid}'>")
        for ref in refs:
            parts.append(f"<nd ref='{ref}'/>")
        for k, v in tags.items():
            parts.append(f"<tag k='{k}' v='{v}'/>")
        parts.append("</way>")
    parts.append("</osm>")
    return "".join(parts)


class TestImport:
    def test_latitude_step_maps_to_meters(self):
        # 0.001 deg of latitude is about 111.19 m on a 6371 km sphere
        text = osm_doc(
            [("1", 52.0, 8.0), ("2", 52.001, 8.0)],
            [("10", ["1", "2"], {"highway": "residential"})],
        )
        (way,) = import_osm(text)
        dist = (way.points[1] - way.points[0]).norm()
        expected = EARTH_RADIUS_M * math.radians(0.001)
        assert expected == pytest.approx(111.19, abs=0.05)
        assert dist == pytest.approx(expected, abs=0.05)
        assert way.spline.total_length == pytest.approx(expected, abs=0.05)

    def test_longitude_step_shrinks_with_latitude(self):
        text = osm_doc(
            [("1", 60.0, 8.0), ("2", 60.0, 8.001)],
            [("10", ["1", "2"], {"highway": "primary"})],
        )
        (way,) = import_osm(text)
        dist = (way.points[1] - way.points[0]).norm()
        expected = EARTH_RADIUS_M * math.radians(0.001) * math.cos(math.radians(60.0))
        assert dist == pytest.approx(expected, abs=0.05)

    def test_collinear_nodes_stay_on_a_line(self):
        text = osm_doc(
            [("1", 50.0, 7.0), ("2", 50.0, 7.001), ("3", 50.0, 7.002),
             ("4", 50.0, 7.003)],
            [("10", ["1", "2", "3", "4"], {"highway": "tertiary"})],
        )
        (way,) = import_osm(text)
        for i in range(101):
            s = way.spline.total_length * i / 100
            pos, _ = way.spline.point_at_distance(s)
            assert abs(pos.y - way.points[0].y) <= 1e-6

    def test_spline_interpolates_projected_nodes(self):
        text = osm_doc(
            [("1", 50.0, 7.0), ("2", 50.0005, 7.001), ("3", 50.0, 7.002)],
            [("10", ["1", "2", "3"], {"highway": "residential"})],
        )
        (way,) = import_osm(text)
        for p in way.points:
            s, lateral = way.spline.project_to_path(p)
            assert abs(lateral) <= 1e-6

    def test_non_highway_ways_skipped(self):
        text = osm_doc(
            [("1", 50.0, 7.0), ("2", 50.001, 7.0)],
            [
                ("10", ["1", "2"], {"building": "yes"}),
                ("11", ["1", "2"], {"highway": "service"}),
            ],
        )
        ways = import_osm(text)
        assert [w.way_id for w in ways] == ["11"]
        assert ways[0].highway == "service"

    def test_dangling_node_reference(self):
        text = osm_doc(
            [("1", 50.0, 7.0)],
            [("10", ["1", "999"], {"highway": "residential"})],
        )
        with pytest.raises(OsmParseError, match="dangling"):
            import_osm(text)

    def test_single_node_way_rejected(self):
        text = osm_doc(
            [("1", 50.0, 7.0)],
            [("10", ["1"], {"highway": "residential"})],
        )
        with pytest.raises(OsmParseError, match="fewer than 2"):
            import_osm(text)

    def test_malformed_xml(self):
        with pytest.raises(OsmParseError, match="malformed"):
            import_osm("<osm><node id='1'")

    def test_bad_latlon(self):
        text = "<osm><node id='1' lat='abc' lon='7.0'/></osm>"
        with pytest.raises(OsmParseError):
            import_osm(text)


class TestPathDefs:
    def test_ways_become_named_polylines(self):
        text = osm_doc(
            [("1", 50.0, 7.0), ("2", 50.001, 7.0)],
            [("10", ["1", "2"], {"highway": "residential"})],
        )
        defs = ways_to_path_defs(import_osm(text))
        assert list(defs) == ["osm_way_10"]
        pts = defs["osm_way_10"]["points"]
        assert len(pts) == 2
        assert all(len(p) == 3 for p in pts)
