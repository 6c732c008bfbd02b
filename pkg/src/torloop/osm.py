"""OpenStreetMap XML subset importer.

Reads `node`/`way`/`nd`/`tag` elements, keeps ways tagged `highway`,
projects lat/lon to local meters with an equirectangular projection about
the bounding-box center, and fits each way's polyline with the same
Catmull-Rom scheme used for scenario polylines. Everything else in the
OSM model (lanes, junctions, relations) is ignored.
"""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass

from .geometry import PathSpline, Vec3
from .scenario import polyline_to_segments

EARTH_RADIUS_M = 6_371_000.0


class OsmParseError(ValueError):
    pass


@dataclass(frozen=True)
class OsmWay:
    way_id: str
    highway: str
    spline: PathSpline
    points: tuple[Vec3, ...]


def _parse_latlon(elem: ET.Element, what: str) -> tuple[float, float]:
    try:
        return float(elem.attrib["lat"]), float(elem.attrib["lon"])
    except (KeyError, ValueError) as exc:
        raise OsmParseError(f"{what}: bad or missing lat/lon") from exc


def import_osm(xml_text: str) -> list[OsmWay]:
    """Turn highway-tagged OSM ways into local-frame splines."""
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise OsmParseError(f"malformed XML: {exc}") from exc

    nodes: dict[str, tuple[float, float]] = {}
    for node in root.iter("node"):
        node_id = node.attrib.get("id")
        if node_id is None:
            raise OsmParseError("node without id")
        nodes[node_id] = _parse_latlon(node, f"node {node_id}")

    if nodes:
        lats = [lat for lat, _ in nodes.values()]
        lons = [lon for _, lon in nodes.values()]
        lat0 = (min(lats) + max(lats)) / 2.0
        lon0 = (min(lons) + max(lons)) / 2.0
    else:
        lat0 = lon0 = 0.0
    cos_lat0 = math.cos(math.radians(lat0))

    def project(lat: float, lon: float) -> Vec3:
        x = EARTH_RADIUS_M * math.radians(lon - lon0) * cos_lat0
        y = EARTH_RADIUS_M * math.radians(lat - lat0)
        return Vec3(x, y, 0.0)

    ways: list[OsmWay] = []
    for way in root.iter("way"):
        way_id = way.attrib.get("id", "?")
        tags = {
            t.attrib.get("k"): t.attrib.get("v") for t in way.findall("tag")
        }
        if "highway" not in tags:
            continue
        refs = [nd.attrib.get("ref") for nd in way.findall("nd")]
        if len(refs) < 2:
            raise OsmParseError(f"way {way_id}: fewer than 2 nodes")
        points = []
        for ref in refs:
            if ref not in nodes:
                raise OsmParseError(f"way {way_id}: dangling nd ref {ref!r}")
            points.append(project(*nodes[ref]))
        spline = PathSpline(polyline_to_segments(points))
        ways.append(
            OsmWay(
                way_id=way_id,
                highway=tags["highway"] or "",
                spline=spline,
                points=tuple(points),
            )
        )
    return ways


def ways_to_path_defs(ways: list[OsmWay]) -> dict[str, dict]:
    """Scenario-format path definitions (one named polyline per way)."""
    return {
        f"osm_way_{w.way_id}": {
            "points": [[p.x, p.y, p.z] for p in w.points]
        }
        for w in ways
    }
