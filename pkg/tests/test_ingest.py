"""CSV parsing and cleaning tests for both trip schemas."""
from __future__ import annotations

import json
from datetime import datetime

import pytest

from mobfc.ingest import (
    FOOD_SCHEMA,
    NYC_BBOX,
    CleaningReport,
    FoodOrderRecord,
    RowError,
    SchemaError,
    TripRecord,
    clean,
    parse_food_csv,
    parse_taxi_csv,
    write_food_csv,
    write_taxi_csv,
)

from conftest import food_csv, taxi_csv


class TestParseTaxi:
    def test_valid_row_parses_all_fields(self, valid_taxi_row):
        (record,) = list(parse_taxi_csv(taxi_csv([valid_taxi_row])))
        assert isinstance(record, TripRecord)
        assert record.pickup_datetime == datetime(2013, 1, 15, 8, 30)
        assert record.dropoff_datetime == datetime(2013, 1, 15, 8, 45)
        assert record.passenger_count == 1
        assert record.trip_time_secs == 900
        assert record.trip_distance == 2.5
        assert record.pickup_lon == -73.98
        assert record.pickup_lat == 40.75
        assert record.dropoff_lon == -73.97
        assert record.dropoff_lat == 40.76

    def test_blank_field_is_missing_error(self, valid_taxi_row):
        bad = valid_taxi_row.replace(",1,", ",,", 1)
        (err,) = list(parse_taxi_csv(taxi_csv([bad])))
        assert isinstance(err, RowError)
        assert err.kind == "missing"
        assert err.line == 2

    def test_garbage_numeric_is_invalid_error(self, valid_taxi_row):
        bad = valid_taxi_row.replace("2.5", "abc")
        (err,) = list(parse_taxi_csv(taxi_csv([bad])))
        assert err.kind == "invalid"

    def test_bad_timestamp_is_invalid_error(self, valid_taxi_row):
        bad = valid_taxi_row.replace("2013-01-15 08:30:00", "not-a-date")
        (err,) = list(parse_taxi_csv(taxi_csv([bad])))
        assert err.kind == "invalid"

    def test_world_bounds_checked_at_parse_time(self, valid_taxi_row):
        bad = valid_taxi_row.replace("40.75", "99.0")
        (err,) = list(parse_taxi_csv(taxi_csv([bad])))
        assert err.kind == "invalid"
        assert "latitude" in err.reason

    def test_negative_distance_rejected(self, valid_taxi_row):
        bad = valid_taxi_row.replace("2.5", "-2.5")
        (err,) = list(parse_taxi_csv(taxi_csv([bad])))
        assert err.kind == "invalid"

    def test_row_order_and_line_numbers_preserved(self, valid_taxi_row):
        bad = valid_taxi_row.replace("2.5", "abc")
        out = list(parse_taxi_csv(taxi_csv([valid_taxi_row, bad, valid_taxi_row])))
        assert isinstance(out[0], TripRecord)
        assert isinstance(out[1], RowError) and out[1].line == 3
        assert isinstance(out[2], TripRecord)

    def test_reordered_header_still_maps_columns(self, valid_taxi_row):
        cols = valid_taxi_row.split(",")
        header = (
            "trip_distance,pickup_datetime,dropoff_datetime,passenger_count,"
            "trip_time_in_secs,pickup_longitude,pickup_latitude,dropoff_longitude,dropoff_latitude"
        )
        row = ",".join([cols[4], cols[0], cols[1], cols[2], cols[3], cols[5], cols[6], cols[7], cols[8]])
        import io

        source = io.BytesIO((header + "\n" + row + "\n").encode())
        (record,) = list(parse_taxi_csv(source))
        assert record.trip_distance == 2.5
        assert record.passenger_count == 1

    def test_missing_column_raises_schema_error(self):
        import io

        source = io.BytesIO(b"pickup_datetime,trip_distance\nx,y\n")
        with pytest.raises(SchemaError):
            list(parse_taxi_csv(source))

    def test_empty_file_raises_schema_error(self):
        import io

        with pytest.raises(SchemaError):
            list(parse_taxi_csv(io.BytesIO(b"")))

    def test_blank_lines_skipped(self, valid_taxi_row):
        import io

        from conftest import TAXI_HEADER

        source = io.BytesIO((TAXI_HEADER + "\n\n" + valid_taxi_row + "\n\n").encode())
        out = list(parse_taxi_csv(source))
        assert len(out) == 1

    def test_parses_from_file_path(self, tmp_path, valid_taxi_row):
        path = tmp_path / "trips.csv"
        path.write_bytes(taxi_csv([valid_taxi_row]).getvalue())
        (record,) = list(parse_taxi_csv(path))
        assert record.passenger_count == 1


class TestParseFood:
    def test_valid_row(self):
        (record,) = list(parse_food_csv(food_csv(["7,3,2,11,5,4,19,2"])))
        assert isinstance(record, FoodOrderRecord)
        assert record.user_id == 7
        assert record.day_of_week == 4
        assert record.hour_of_day == 19
        assert record.item_count == 2

    def test_day_of_week_range_enforced(self):
        (err,) = list(parse_food_csv(food_csv(["7,3,2,11,5,7,19,2"])))
        assert isinstance(err, RowError) and err.kind == "invalid"

    def test_hour_of_day_range_enforced(self):
        (err,) = list(parse_food_csv(food_csv(["7,3,2,11,5,4,24,2"])))
        assert err.kind == "invalid"

    def test_zero_item_count_rejected(self):
        (err,) = list(parse_food_csv(food_csv(["7,3,2,11,5,4,19,0"])))
        assert err.kind == "invalid"


class TestClean:
    def test_clean_stream_passes_valid_rows(self, valid_taxi_row):
        stream, report = clean(parse_taxi_csv(taxi_csv([valid_taxi_row] )))
        kept = list(stream)
        assert len(kept) == 1
        assert report.rows_read == 1
        assert report.rows_kept == 1
        assert report.reconciles()

    def test_swapped_timestamps_dropped_as_invalid(self, valid_taxi_row):
        cols = valid_taxi_row.split(",")
        cols[0], cols[1] = cols[1], cols[0]
        stream, report = clean(parse_taxi_csv(taxi_csv([",".join(cols)])))
        assert list(stream) == []
        assert report.rows_dropped_invalid == 1

    def test_zero_passengers_dropped(self, valid_taxi_row):
        bad = valid_taxi_row.replace(",1,", ",0,", 1)
        stream, report = clean(parse_taxi_csv(taxi_csv([bad])))
        assert list(stream) == []
        assert report.rows_dropped_invalid == 1

    def test_out_of_bbox_dropped_but_kept_without_bbox(self, valid_taxi_row):
        chicago = valid_taxi_row.replace("-73.98", "-87.63").replace("40.75", "41.88")
        stream, report = clean(parse_taxi_csv(taxi_csv([chicago])), bbox=NYC_BBOX)
        assert list(stream) == []
        assert report.rows_dropped_invalid == 1

        stream, report = clean(parse_taxi_csv(taxi_csv([chicago])), bbox=None)
        assert len(list(stream)) == 1

    def test_exact_duplicates_dropped(self, valid_taxi_row):
        stream, report = clean(parse_taxi_csv(taxi_csv([valid_taxi_row] * 3)))
        assert len(list(stream)) == 1
        assert report.rows_dropped_duplicate == 2
        assert report.reconciles()

    def test_near_duplicates_kept(self, valid_taxi_row):
        other = valid_taxi_row.replace("2.5", "2.6")
        stream, _ = clean(parse_taxi_csv(taxi_csv([valid_taxi_row, other])))
        assert len(list(stream)) == 2

    def test_mixed_stream_reconciles(self, valid_taxi_row):
        rows = [
            valid_taxi_row,
            valid_taxi_row,  # duplicate
            valid_taxi_row.replace("2.5", "abc"),  # invalid parse
            valid_taxi_row.replace(",1,", ",,", 1),  # missing
            valid_taxi_row.replace("2.5", "3.5"),
        ]
        stream, report = clean(parse_taxi_csv(taxi_csv(rows)))
        kept = list(stream)
        assert len(kept) == 2
        assert report.rows_read == 5
        assert report.rows_dropped_duplicate == 1
        assert report.rows_dropped_invalid == 1
        assert report.rows_dropped_missing == 1
        assert report.reconciles()

    def test_food_rows_not_coordinate_checked(self):
        stream, report = clean(parse_food_csv(food_csv(["7,3,2,11,5,4,19,2"])), bbox=None)
        assert len(list(stream)) == 1
        assert report.reconciles()

    def test_report_json_round_trip(self, tmp_path, valid_taxi_row):
        stream, report = clean(parse_taxi_csv(taxi_csv([valid_taxi_row, valid_taxi_row])))
        list(stream)
        path = tmp_path / "report.json"
        report.to_json(path)
        payload = json.loads(path.read_text())
        assert payload["rows_read"] == 2
        assert payload["rows_kept"] == 1
        assert payload["rows_dropped_duplicate"] == 1


class TestWriters:
    def test_taxi_write_parse_round_trip(self, tmp_path, valid_taxi_row):
        stream, _ = clean(parse_taxi_csv(taxi_csv([valid_taxi_row])))
        records = list(stream)
        path = tmp_path / "out.csv"
        n = write_taxi_csv(records, path)
        assert n == 1
        back = list(parse_taxi_csv(path))
        assert back == records

    def test_food_write_parse_round_trip(self, tmp_path):
        records = list(parse_food_csv(food_csv(["7,3,2,11,5,4,19,2", "8,1,1,2,3,5,12,1"])))
        path = tmp_path / "food.csv"
        n = write_food_csv(records, path)
        assert n == 2
        assert list(parse_food_csv(path)) == records

    def test_written_header_matches_schema_order(self, tmp_path, valid_taxi_row):
        stream, _ = clean(parse_taxi_csv(taxi_csv([valid_taxi_row])))
        path = tmp_path / "out.csv"
        write_taxi_csv(stream, path)
        header = path.read_text().splitlines()[0]
        from conftest import TAXI_HEADER

        assert header == TAXI_HEADER
