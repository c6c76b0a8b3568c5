"""Point-in-polygon tests against an independent winding-number oracle."""
from __future__ import annotations

import math

import numpy as np
import pytest

from mobfc.geospatial import (
    UNKNOWN,
    BoroughPolygon,
    BoroughStats,
    assign_borough,
    borough_demand,
    bundled_boroughs_path,
    load_boroughs_geojson,
    point_in_polygon,
    write_borough_stats_csv,
)


def winding_number_inside(p, poly: BoroughPolygon) -> bool:
    """Oracle: total signed angle subtended by each ring, summed over rings.

    For an even-odd fill an enclosing ring contributes +-2pi and a hole ring
    containing the point contributes another +-2pi; counting rings with
    nonzero winding modulo 2 reproduces the even-odd rule for the
    non-self-intersecting polygons used here.
    """
    x, y = p
    enclosing = 0
    for ring in poly.rings:
        total = 0.0
        for i in range(len(ring) - 1):
            ax, ay = ring[i][0] - x, ring[i][1] - y
            bx, by = ring[i + 1][0] - x, ring[i + 1][1] - y
            total += math.atan2(ax * by - ay * bx, ax * bx + ay * by)
        if abs(total) > math.pi:  # ~2pi when the ring encloses p, ~0 otherwise
            enclosing += 1
    return enclosing % 2 == 1


def square(name="sq", lo=0.0, hi=1.0):
    return BoroughPolygon.from_rings(name, [[[lo, lo], [hi, lo], [hi, hi], [lo, hi], [lo, lo]]])


def square_with_hole():
    return BoroughPolygon.from_rings(
        "donut",
        [
            [[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0], [0.0, 0.0]],
            [[1.5, 1.5], [2.5, 1.5], [2.5, 2.5], [1.5, 2.5], [1.5, 1.5]],
        ],
    )


def concave_polygon():
    # A "C" shape opening to the right.
    return BoroughPolygon.from_rings(
        "cshape",
        [
            [
                [0.0, 0.0],
                [3.0, 0.0],
                [3.0, 1.0],
                [1.0, 1.0],
                [1.0, 3.0],
                [3.0, 3.0],
                [3.0, 4.0],
                [0.0, 4.0],
                [0.0, 0.0],
            ]
        ],
    )


class TestPointInPolygon:
    def test_square_interior_and_exterior(self):
        sq = square()
        assert point_in_polygon((0.5, 0.5), sq)
        assert not point_in_polygon((1.5, 0.5), sq)
        assert not point_in_polygon((-0.5, 0.5), sq)

    def test_hole_excludes_its_interior(self):
        donut = square_with_hole()
        assert point_in_polygon((0.5, 0.5), donut)
        assert not point_in_polygon((2.0, 2.0), donut)  # inside the hole
        assert point_in_polygon((3.5, 3.5), donut)

    def test_concave_notch_is_outside(self):
        c = concave_polygon()
        assert point_in_polygon((0.5, 2.0), c)  # spine
        assert not point_in_polygon((2.0, 2.0), c)  # inside the notch
        assert point_in_polygon((2.0, 0.5), c)  # lower arm

    def test_bbox_shortcut_agrees_with_full_test(self):
        sq = square(lo=2.0, hi=3.0)
        assert not point_in_polygon((0.0, 0.0), sq)

    @pytest.mark.parametrize("poly_factory", [square, square_with_hole, concave_polygon])
    def test_agrees_with_winding_number_oracle(self, poly_factory):
        poly = poly_factory()
        rng = np.random.default_rng(42)
        min_lon, min_lat, max_lon, max_lat = poly.bbox
        span_x = max_lon - min_lon
        span_y = max_lat - min_lat
        xs = rng.uniform(min_lon - 0.2 * span_x, max_lon + 0.2 * span_x, size=1000)
        ys = rng.uniform(min_lat - 0.2 * span_y, max_lat + 0.2 * span_y, size=1000)
        for x, y in zip(xs, ys):
            assert point_in_polygon((x, y), poly) == winding_number_inside((x, y), poly)

    def test_open_ring_rejected(self):
        with pytest.raises(ValueError):
            BoroughPolygon.from_rings("bad", [[[0, 0], [1, 0], [1, 1]]])


class TestAssignBorough:
    def test_first_match_wins(self):
        a = square("a", 0.0, 2.0)
        b = square("b", 1.0, 3.0)
        assert assign_borough((1.5, 1.5), [a, b]) == "a"
        assert assign_borough((1.5, 1.5), [b, a]) == "b"

    def test_unknown_when_outside_all(self):
        assert assign_borough((10.0, 10.0), [square()]) == UNKNOWN


class TestBoroughDemand:
    class Row:
        def __init__(self, lon, lat, dur, dist):
            self.pickup_lon = lon
            self.pickup_lat = lat
            self.trip_duration_min = dur
            self.trip_distance = dist

    def test_counts_and_averages(self):
        polys = [square("a", 0.0, 1.0), square("b", 2.0, 3.0)]
        rows = [
            self.Row(0.5, 0.5, 10.0, 1.0),
            self.Row(0.6, 0.6, 20.0, 3.0),
            self.Row(2.5, 2.5, 30.0, 5.0),
            self.Row(9.0, 9.0, 40.0, 7.0),
        ]
        stats = borough_demand(rows, polys)
        by_name = {s.borough: s for s in stats}
        assert set(by_name) == {"a", "b", UNKNOWN}
        assert by_name["a"].pickup_count == 2
        assert by_name["a"].avg_trip_duration_min == 15.0
        assert by_name["a"].avg_trip_distance_miles == 2.0
        assert by_name["b"].pickup_count == 1
        assert by_name[UNKNOWN].pickup_count == 1
        assert sum(s.pickup_count for s in stats) == len(rows)

    def test_empty_borough_has_none_averages(self):
        stats = borough_demand([], [square("a")])
        for s in stats:
            assert s.pickup_count == 0
            assert s.avg_trip_duration_min is None
            assert s.avg_trip_distance_miles is None

    def test_multipart_names_collapse_to_one_bucket(self):
        parts = [square("a", 0.0, 1.0), square("a", 2.0, 3.0)]
        stats = borough_demand([self.Row(0.5, 0.5, 1.0, 1.0), self.Row(2.5, 2.5, 3.0, 1.0)], parts)
        names = [s.borough for s in stats]
        assert names == ["a", UNKNOWN]
        assert stats[0].pickup_count == 2
        assert stats[0].avg_trip_duration_min == 2.0


class TestGeojson:
    def test_bundled_outlines_load_and_classify(self):
        polys = load_boroughs_geojson(bundled_boroughs_path())
        names = {p.name for p in polys}
        assert names == {"Bronx", "Brooklyn", "Manhattan", "Queens", "Staten Island"}
        # Midtown, Times Square-ish.
        assert assign_borough((-73.985, 40.758), polys) == "Manhattan"

    def test_sorted_assignment_order(self):
        polys = load_boroughs_geojson(bundled_boroughs_path())
        assert [p.name for p in polys] == sorted(p.name for p in polys)

    def test_rejects_non_feature_collection(self, tmp_path):
        path = tmp_path / "bad.geojson"
        path.write_text('{"type": "Feature"}')
        with pytest.raises(ValueError):
            load_boroughs_geojson(path)

    def test_rejects_unsupported_geometry(self, tmp_path):
        path = tmp_path / "pt.geojson"
        path.write_text(
            '{"type": "FeatureCollection", "features": [{"properties": {"name": "X"},'
            ' "geometry": {"type": "Point", "coordinates": [0, 0]}}]}'
        )
        with pytest.raises(ValueError):
            load_boroughs_geojson(path)


class TestStatsCsv:
    def test_none_averages_serialized_empty(self, tmp_path):
        stats = [
            BoroughStats("a", 2, 15.0, 2.5),
            BoroughStats(UNKNOWN, 0, None, None),
        ]
        path = tmp_path / "stats.csv"
        write_borough_stats_csv(stats, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "borough,pickup_count,avg_duration_min,avg_distance_miles"
        assert lines[1] == "a,2,15.0,2.5"
        assert lines[2] == "Unknown,0,,"
