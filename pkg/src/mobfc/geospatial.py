"""Borough assignment by point-in-polygon and borough-level trip stats."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

BOROUGH_ORDER = ["Bronx", "Brooklyn", "Manhattan", "Queens", "Staten Island"]
UNKNOWN = "Unknown"

Point = tuple[float, float]  # (lon, lat)
Ring = tuple[Point, ...]


@dataclass(frozen=True)
class BoroughPolygon:
    name: str
    rings: tuple[Ring, ...]  # exterior first, then holes
    bbox: tuple[float, float, float, float]  # min_lon, min_lat, max_lon, max_lat

    @classmethod
    def from_rings(cls, name: str, rings: Sequence[Sequence[Sequence[float]]]) -> "BoroughPolygon":
        clean_rings = []
        for ring in rings:
            pts = tuple((float(x), float(y)) for x, y in ring)
            if len(pts) < 4 or pts[0] != pts[-1]:
                raise ValueError(f"{name}: ring must be closed with >= 4 points")
            clean_rings.append(pts)
        xs = [x for ring in clean_rings for x, _ in ring]
        ys = [y for ring in clean_rings for _, y in ring]
        return cls(name=name, rings=tuple(clean_rings), bbox=(min(xs), min(ys), max(xs), max(ys)))


@dataclass(frozen=True)
class BoroughStats:
    borough: str
    pickup_count: int
    avg_trip_duration_min: float | None
    avg_trip_distance_miles: float | None


def point_in_polygon(p: Point, poly: BoroughPolygon) -> bool:
    """Even-odd ray-casting over all rings, with a bbox rejection shortcut.

    A point inside a hole ring crosses an even number of edges and lands
    outside.  On-edge points get a deterministic (implementation-defined)
    answer from the strict/non-strict comparison pair below.
    """
    x, y = p
    min_lon, min_lat, max_lon, max_lat = poly.bbox
    if x < min_lon or x > max_lon or y < min_lat or y > max_lat:
        return False
    inside = False
    for ring in poly.rings:
        for i in range(len(ring) - 1):
            x1, y1 = ring[i]
            x2, y2 = ring[i + 1]
            if (y1 > y) != (y2 > y):
                x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
                if x < x_cross:
                    inside = not inside
    return inside


def assign_borough(p: Point, polygons: Sequence[BoroughPolygon]) -> str:
    """First polygon (in the given order) containing p, else Unknown."""
    for poly in polygons:
        if point_in_polygon(p, poly):
            return poly.name
    return UNKNOWN


def borough_demand(trips: Iterable, polygons: Sequence[BoroughPolygon]) -> list[BoroughStats]:
    """Pickup counts and average duration/distance per borough plus Unknown.

    `trips` rows need pickup_lon/pickup_lat, trip_duration_min and
    trip_distance (feature rows qualify).  Counts across all buckets sum to
    the number of trips.
    """
    names = list(dict.fromkeys(poly.name for poly in polygons)) + [UNKNOWN]
    count = {name: 0 for name in names}
    dur = {name: 0.0 for name in names}
    dist = {name: 0.0 for name in names}
    for t in trips:
        name = assign_borough((t.pickup_lon, t.pickup_lat), polygons)
        count[name] += 1
        dur[name] += t.trip_duration_min
        dist[name] += t.trip_distance
    return [
        BoroughStats(
            borough=name,
            pickup_count=count[name],
            avg_trip_duration_min=(dur[name] / count[name]) if count[name] else None,
            avg_trip_distance_miles=(dist[name] / count[name]) if count[name] else None,
        )
        for name in names
    ]


def load_boroughs_geojson(path: str | Path) -> list[BoroughPolygon]:
    """Load a WGS84 FeatureCollection of Polygon/MultiPolygon boroughs.

    Returns one BoroughPolygon per polygon part, sorted by name so that
    assignment order is fixed; MultiPolygon parts share their feature's name.
    """
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("type") != "FeatureCollection":
        raise ValueError(f"{path}: expected a GeoJSON FeatureCollection")
    polygons: list[BoroughPolygon] = []
    for feature in doc.get("features", []):
        props = feature.get("properties", {}) or {}
        name = props.get("name") or props.get("boro_name") or props.get("BoroName")
        if name is None:
            raise ValueError(f"{path}: feature without a name/boro_name property")
        geom = feature.get("geometry", {}) or {}
        gtype = geom.get("type")
        if gtype == "Polygon":
            parts = [geom["coordinates"]]
        elif gtype == "MultiPolygon":
            parts = geom["coordinates"]
        else:
            raise ValueError(f"{path}: unsupported geometry type {gtype!r} for {name}")
        for rings in parts:
            polygons.append(BoroughPolygon.from_rings(name, rings))
    polygons.sort(key=lambda poly: poly.name)
    return polygons


def bundled_boroughs_path() -> Path:
    """Low-resolution borough outlines shipped with the package (tests/demo)."""
    return Path(resources.files("mobfc").joinpath("data/nyc_boroughs_lowres.geojson"))


def write_borough_stats_csv(stats: Iterable[BoroughStats], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["borough", "pickup_count", "avg_duration_min", "avg_distance_miles"])
        for s in stats:
            w.writerow(
                [
                    s.borough,
                    str(s.pickup_count),
                    "" if s.avg_trip_duration_min is None else repr(s.avg_trip_duration_min),
                    "" if s.avg_trip_distance_miles is None else repr(s.avg_trip_distance_miles),
                ]
            )
