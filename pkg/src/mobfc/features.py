"""Temporal feature engineering over cleaned trip records."""
from __future__ import annotations

import csv
from dataclasses import astuple, dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Iterator

from .ingest import TripRecord

FEATURE_COLUMNS = [
    "pickup_hour",
    "pickup_day",
    "pickup_month",
    "pickup_dow",
    "dropoff_hour",
    "trip_duration_min",
    "passenger_count",
    "trip_distance",
    "pickup_lon",
    "pickup_lat",
    "dropoff_lon",
    "dropoff_lat",
]


@dataclass(frozen=True)
class FeatureRow:
    pickup_hour: int
    pickup_day: int
    pickup_month: int
    pickup_dow: int  # Monday=0 .. Sunday=6
    dropoff_hour: int
    trip_duration_min: float
    passenger_count: int
    trip_distance: float
    pickup_lon: float
    pickup_lat: float
    dropoff_lon: float
    dropoff_lat: float


def trip_duration_minutes(pickup: datetime, dropoff: datetime) -> float:
    """Exact (dropoff - pickup) span in minutes; negative spans are an error."""
    seconds = (dropoff - pickup).total_seconds()
    if seconds < 0:
        raise ValueError(f"dropoff {dropoff} precedes pickup {pickup}")
    return seconds / 60.0


def derive_features(record: TripRecord) -> FeatureRow:
    """Calendar fields from the pickup/dropoff wall-clock timestamps.

    No timezone conversion; day-of-week is Monday=0 per the proleptic
    Gregorian calendar.
    """
    p = record.pickup_datetime
    return FeatureRow(
        pickup_hour=p.hour,
        pickup_day=p.day,
        pickup_month=p.month,
        pickup_dow=p.weekday(),
        dropoff_hour=record.dropoff_datetime.hour,
        trip_duration_min=trip_duration_minutes(p, record.dropoff_datetime),
        passenger_count=record.passenger_count,
        trip_distance=record.trip_distance,
        pickup_lon=record.pickup_lon,
        pickup_lat=record.pickup_lat,
        dropoff_lon=record.dropoff_lon,
        dropoff_lat=record.dropoff_lat,
    )


def duration_consistency(records: Iterable[TripRecord]) -> dict:
    """Data-quality stat: |computed duration - recorded trip_time_secs|.

    The discrepancy is reported, never corrected; the computed duration is
    authoritative downstream.
    """
    n = 0
    mismatched = 0
    total_abs = 0.0
    max_abs = 0.0
    for r in records:
        diff = abs(trip_duration_minutes(r.pickup_datetime, r.dropoff_datetime) * 60.0 - r.trip_time_secs)
        n += 1
        total_abs += diff
        max_abs = max(max_abs, diff)
        if diff > 0:
            mismatched += 1
    return {
        "records": n,
        "mismatched": mismatched,
        "mean_abs_diff_secs": (total_abs / n) if n else 0.0,
        "max_abs_diff_secs": max_abs,
    }


def write_features_csv(rows: Iterable[FeatureRow], path: str | Path) -> int:
    n = 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(FEATURE_COLUMNS)
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else str(v) for v in astuple(r)])
            n += 1
    return n


def read_features_csv(path: str | Path) -> Iterator[FeatureRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != FEATURE_COLUMNS:
            raise ValueError(f"{path}: unexpected feature columns {header}")
        for row in reader:
            yield FeatureRow(
                pickup_hour=int(row[0]),
                pickup_day=int(row[1]),
                pickup_month=int(row[2]),
                pickup_dow=int(row[3]),
                dropoff_hour=int(row[4]),
                trip_duration_min=float(row[5]),
                passenger_count=int(row[6]),
                trip_distance=float(row[7]),
                pickup_lon=float(row[8]),
                pickup_lat=float(row[9]),
                dropoff_lon=float(row[10]),
                dropoff_lat=float(row[11]),
            )
