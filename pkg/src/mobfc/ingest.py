"""Streaming CSV ingestion for taxi trips and food orders.

Parsers are generators over (record | RowError) so multi-GB files are never
held in memory; `clean` drops rows that violate record invariants, rows with
out-of-area coordinates, and exact duplicates, tallying every drop.
"""
from __future__ import annotations

import csv
import gzip
import hashlib
import io
import json
from dataclasses import asdict, astuple, dataclass
from datetime import datetime
from pathlib import Path
from typing import IO, Iterable, Iterator, Union

TIMESTAMP_FMT = "%Y-%m-%d %H:%M:%S"

# Anything with both corners outside this box is treated as a garbage
# coordinate (raw TLC exports contain (0,0) and worse).
NYC_BBOX = (-74.3, 40.4, -73.6, 41.0)  # min_lon, min_lat, max_lon, max_lat

# Logical field -> column name in the 2013 TLC trip_data export.
TAXI_SCHEMA = {
    "pickup_datetime": "pickup_datetime",
    "dropoff_datetime": "dropoff_datetime",
    "passenger_count": "passenger_count",
    "trip_time_secs": "trip_time_in_secs",
    "trip_distance": "trip_distance",
    "pickup_lon": "pickup_longitude",
    "pickup_lat": "pickup_latitude",
    "dropoff_lon": "dropoff_longitude",
    "dropoff_lat": "dropoff_latitude",
}

FOOD_SCHEMA = {
    "user_id": "user_id",
    "item_id": "item_id",
    "category_id": "category_id",
    "restaurant_id": "restaurant_id",
    "cuisine_id": "cuisine_id",
    "day_of_week": "day_of_week",
    "hour_of_day": "hour_of_day",
    "item_count": "item_count",
}


class SchemaError(ValueError):
    """The CSV header does not contain the expected columns."""


@dataclass(frozen=True)
class TripRecord:
    pickup_datetime: datetime
    dropoff_datetime: datetime
    passenger_count: int
    trip_time_secs: int
    trip_distance: float
    pickup_lon: float
    pickup_lat: float
    dropoff_lon: float
    dropoff_lat: float


@dataclass(frozen=True)
class FoodOrderRecord:
    user_id: int
    item_id: int
    category_id: int
    restaurant_id: int
    cuisine_id: int
    day_of_week: int
    hour_of_day: int
    item_count: int


@dataclass(frozen=True)
class RowError:
    line: int
    reason: str
    kind: str  # "missing" | "invalid"


@dataclass
class CleaningReport:
    rows_read: int = 0
    rows_kept: int = 0
    rows_dropped_missing: int = 0
    rows_dropped_duplicate: int = 0
    rows_dropped_invalid: int = 0

    def reconciles(self) -> bool:
        dropped = self.rows_dropped_missing + self.rows_dropped_duplicate + self.rows_dropped_invalid
        return self.rows_read == self.rows_kept + dropped

    def to_json(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2)
            fh.write("\n")


Source = Union[str, Path, IO[bytes], IO[str]]


def _open_text(source: Source) -> tuple[IO[str], bool]:
    """Open a path or stream as text, transparently ungzipping.

    Returns (handle, owns) where owns says whether the caller should close.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        if not path.exists():
            raise FileNotFoundError(f"input file not found: {path}")
        if path.suffix == ".gz":
            return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8"), True
        return open(path, "r", encoding="utf-8", newline=""), True
    if hasattr(source, "mode") and "b" in getattr(source, "mode", ""):
        return io.TextIOWrapper(source, encoding="utf-8"), False
    if isinstance(source, io.BytesIO) or (hasattr(source, "read") and isinstance(source.read(0), bytes)):
        return io.TextIOWrapper(source, encoding="utf-8"), False
    return source, False


def _index_header(header: list[str], schema: dict[str, str], what: str) -> dict[str, int]:
    cols = {name.strip(): i for i, name in enumerate(header)}
    index = {}
    for logical, column in schema.items():
        if column not in cols:
            raise SchemaError(f"{what} header is missing column {column!r} (have {sorted(cols)})")
        index[logical] = cols[column]
    return index


def _field(row: list[str], idx: int) -> str:
    if idx >= len(row):
        raise _Missing()
    value = row[idx].strip()
    if value == "":
        raise _Missing()
    return value


class _Missing(Exception):
    pass


def parse_taxi_csv(source: Source, schema: dict[str, str] | None = None) -> Iterator[TripRecord | RowError]:
    """Yield one TripRecord per well-formed row, RowError otherwise.

    Field-level validation happens here (parseable types, coordinates within
    world bounds, non-negative counts); cross-field and policy checks are
    `clean`'s job.  Row order is preserved.
    """
    schema = schema or TAXI_SCHEMA
    fh, owns = _open_text(source)
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError("empty input: no header row")
        index = _index_header(header, schema, "taxi")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                yield TripRecord(
                    pickup_datetime=datetime.strptime(_field(row, index["pickup_datetime"]), TIMESTAMP_FMT),
                    dropoff_datetime=datetime.strptime(_field(row, index["dropoff_datetime"]), TIMESTAMP_FMT),
                    passenger_count=_nonneg_int(_field(row, index["passenger_count"])),
                    trip_time_secs=_nonneg_int(_field(row, index["trip_time_secs"])),
                    trip_distance=_nonneg_float(_field(row, index["trip_distance"])),
                    pickup_lon=_lon(_field(row, index["pickup_lon"])),
                    pickup_lat=_lat(_field(row, index["pickup_lat"])),
                    dropoff_lon=_lon(_field(row, index["dropoff_lon"])),
                    dropoff_lat=_lat(_field(row, index["dropoff_lat"])),
                )
            except _Missing:
                yield RowError(line=lineno, reason="missing field", kind="missing")
            except ValueError as exc:
                yield RowError(line=lineno, reason=str(exc), kind="invalid")
    finally:
        if owns:
            fh.close()


def parse_food_csv(source: Source, schema: dict[str, str] | None = None) -> Iterator[FoodOrderRecord | RowError]:
    """Yield one FoodOrderRecord per well-formed row, RowError otherwise."""
    schema = schema or FOOD_SCHEMA
    fh, owns = _open_text(source)
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError("empty input: no header row")
        index = _index_header(header, schema, "food")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                yield FoodOrderRecord(
                    user_id=int(_field(row, index["user_id"])),
                    item_id=int(_field(row, index["item_id"])),
                    category_id=int(_field(row, index["category_id"])),
                    restaurant_id=int(_field(row, index["restaurant_id"])),
                    cuisine_id=int(_field(row, index["cuisine_id"])),
                    day_of_week=_ranged_int(_field(row, index["day_of_week"]), 0, 6, "day_of_week"),
                    hour_of_day=_ranged_int(_field(row, index["hour_of_day"]), 0, 23, "hour_of_day"),
                    item_count=_ranged_int(_field(row, index["item_count"]), 1, None, "item_count"),
                )
            except _Missing:
                yield RowError(line=lineno, reason="missing field", kind="missing")
            except ValueError as exc:
                yield RowError(line=lineno, reason=str(exc), kind="invalid")
    finally:
        if owns:
            fh.close()


def _nonneg_int(s: str) -> int:
    v = int(s)
    if v < 0:
        raise ValueError(f"negative count {v}")
    return v


def _nonneg_float(s: str) -> float:
    v = float(s)
    if v < 0:
        raise ValueError(f"negative distance {v}")
    return v


def _lat(s: str) -> float:
    v = float(s)
    if not -90.0 <= v <= 90.0:
        raise ValueError(f"latitude {v} out of range")
    return v


def _lon(s: str) -> float:
    v = float(s)
    if not -180.0 <= v <= 180.0:
        raise ValueError(f"longitude {v} out of range")
    return v


def _ranged_int(s: str, lo: int, hi: int | None, name: str) -> int:
    v = int(s)
    if v < lo or (hi is not None and v > hi):
        raise ValueError(f"{name} {v} out of range")
    return v


def _trip_invalid_reason(r: TripRecord, bbox) -> str | None:
    if r.dropoff_datetime < r.pickup_datetime:
        return "dropoff before pickup"
    if r.passenger_count < 1:
        return "passenger_count < 1"
    if bbox is not None:
        min_lon, min_lat, max_lon, max_lat = bbox
        for lon, lat, side in (
            (r.pickup_lon, r.pickup_lat, "pickup"),
            (r.dropoff_lon, r.dropoff_lat, "dropoff"),
        ):
            if not (min_lon <= lon <= max_lon and min_lat <= lat <= max_lat):
                return f"{side} coordinates outside bounding box"
    return None


def _digest(record) -> bytes:
    # 128-bit digests keep the dedup set an order of magnitude smaller than
    # storing records; collision odds are negligible at any realistic size.
    return hashlib.blake2b(repr(astuple(record)).encode(), digest_size=16).digest()


def clean(
    records: Iterable[TripRecord | FoodOrderRecord | RowError],
    bbox: tuple[float, float, float, float] | None = NYC_BBOX,
) -> tuple[Iterator[TripRecord | FoodOrderRecord], CleaningReport]:
    """Drop invalid rows and exact duplicates from a parsed stream.

    Returns a lazy stream plus the report that tallies alongside it; the
    counters are final once the stream is exhausted.  Pass bbox=None to skip
    the coordinate-sanity filter (food records are never coordinate-checked).
    """
    report = CleaningReport()

    def gen() -> Iterator[TripRecord | FoodOrderRecord]:
        seen: set[bytes] = set()
        for item in records:
            report.rows_read += 1
            if isinstance(item, RowError):
                if item.kind == "missing":
                    report.rows_dropped_missing += 1
                else:
                    report.rows_dropped_invalid += 1
                continue
            if isinstance(item, TripRecord):
                reason = _trip_invalid_reason(item, bbox)
                if reason is not None:
                    report.rows_dropped_invalid += 1
                    continue
            key = _digest(item)
            if key in seen:
                report.rows_dropped_duplicate += 1
                continue
            seen.add(key)
            report.rows_kept += 1
            yield item

    return gen(), report


def _format_trip_row(r: TripRecord) -> list[str]:
    return [
        r.pickup_datetime.strftime(TIMESTAMP_FMT),
        r.dropoff_datetime.strftime(TIMESTAMP_FMT),
        str(r.passenger_count),
        str(r.trip_time_secs),
        repr(r.trip_distance),
        repr(r.pickup_lon),
        repr(r.pickup_lat),
        repr(r.dropoff_lon),
        repr(r.dropoff_lat),
    ]


def write_taxi_csv(records: Iterable[TripRecord], path: str | Path, schema: dict[str, str] | None = None) -> int:
    """Write trips back out with the schema's column names/order; returns row count."""
    schema = schema or TAXI_SCHEMA
    n = 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([schema[logical] for logical in TAXI_SCHEMA])
        for r in records:
            w.writerow(_format_trip_row(r))
            n += 1
    return n


def write_food_csv(records: Iterable[FoodOrderRecord], path: str | Path, schema: dict[str, str] | None = None) -> int:
    schema = schema or FOOD_SCHEMA
    n = 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([schema[logical] for logical in FOOD_SCHEMA])
        for r in records:
            w.writerow([str(v) for v in astuple(r)])
            n += 1
    return n
