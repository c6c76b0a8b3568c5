"""Seeded synthetic fixture generators for taxi trips and food orders.

The generated data is shaped to show the qualitative patterns the pipeline
is meant to surface: an evening demand peak at hour 19, a weekly cycle,
most pickups in Manhattan and fewest in Staten Island, the longest trips
out of Queens, and food ordering heaviest on Friday/Saturday.  Same seed,
same bytes.
"""
from __future__ import annotations

import argparse
import csv
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .ingest import FOOD_SCHEMA, TAXI_SCHEMA, TripRecord, _format_trip_row

BOROUGH_NAMES = ("Manhattan", "Brooklyn", "Queens", "Bronx", "Staten Island")
BOROUGH_WEIGHTS = (0.50, 0.18, 0.15, 0.12, 0.05)

# Mean trip duration (minutes) and typical speed (mph) per pickup borough;
# Queens gets both the longest durations and the fastest roads, so its trips
# come out longest in distance as well.
_DURATION_MEAN_MIN = {"Manhattan": 11.0, "Brooklyn": 14.0, "Queens": 24.0, "Bronx": 13.0, "Staten Island": 17.0}
_SPEED_MPH = {"Manhattan": 10.0, "Brooklyn": 11.5, "Queens": 14.0, "Bronx": 11.0, "Staten Island": 13.0}

# Hourly demand weights, strict maximum at hour 19.
TAXI_HOUR_WEIGHTS = np.array(
    [1.0, 0.6, 0.4, 0.3, 0.3, 0.5, 1.2, 2.0, 2.6, 2.2, 2.0, 2.0,
     2.2, 2.2, 2.1, 2.2, 2.4, 2.8, 3.2, 3.8, 3.4, 2.8, 2.2, 1.5]
)

# Monday=0 .. Sunday=6; a mild weekly cycle for taxis.
TAXI_DOW_WEIGHTS = np.array([1.0, 0.95, 0.98, 1.05, 1.25, 1.3, 1.1])

# Food ordering peaks on Friday/Saturday and at dinner time.
FOOD_DOW_WEIGHTS = np.array([0.9, 0.85, 0.9, 1.0, 1.5, 1.6, 1.1])
FOOD_HOUR_WEIGHTS = np.array(
    [0.3, 0.15, 0.1, 0.05, 0.05, 0.1, 0.3, 0.8, 1.2, 1.0, 1.0, 1.6,
     2.2, 2.0, 1.4, 1.0, 1.2, 1.8, 2.6, 3.2, 2.8, 2.0, 1.2, 0.6]
)

# NYC bounding box the cleaner accepts, shrunk slightly so jittered dropoff
# points stay inside after clipping.
_CLIP = (-74.29, 40.41, -73.61, 40.99)


def _sample_box(rng: np.random.Generator, lon0: float, lat0: float, lon1: float, lat1: float) -> tuple[float, float]:
    u = 0.05 + 0.9 * rng.random()
    v = 0.05 + 0.9 * rng.random()
    return lon0 + u * (lon1 - lon0), lat0 + v * (lat1 - lat0)


def _sample_manhattan(rng: np.random.Generator) -> tuple[float, float]:
    # Interior of the slanted Manhattan outline in the bundled borough file.
    t = 0.05 + 0.9 * rng.random()
    u = 0.05 + 0.9 * rng.random()
    return -74.03 + 0.10 * t + 0.04 * u, 40.70 + 0.18 * t


def sample_pickup(rng: np.random.Generator, borough: str) -> tuple[float, float]:
    """A pickup point strictly inside the named bundled borough outline."""
    if borough == "Manhattan":
        return _sample_manhattan(rng)
    if borough == "Brooklyn":
        return _sample_box(rng, -74.04, 40.56, -73.88, 40.69)
    if borough == "Queens":
        return _sample_box(rng, -73.87, 40.56, -73.70, 40.79)
    if borough == "Bronx":
        return _sample_box(rng, -73.88, 40.80, -73.76, 40.91)
    if borough == "Staten Island":
        return _sample_box(rng, -74.25, 40.49, -74.06, 40.64)
    raise ValueError(f"unknown borough {borough!r}")


def _make_trip(rng: np.random.Generator, day: datetime) -> TripRecord:
    hour = int(rng.choice(24, p=TAXI_HOUR_WEIGHTS / TAXI_HOUR_WEIGHTS.sum()))
    minute = int(rng.integers(0, 60))
    second = int(rng.integers(0, 60))
    pickup_dt = day.replace(hour=hour, minute=minute, second=second)

    borough = BOROUGH_NAMES[int(rng.choice(len(BOROUGH_NAMES), p=BOROUGH_WEIGHTS))]
    lon, lat = sample_pickup(rng, borough)

    mean_min = _DURATION_MEAN_MIN[borough]
    duration_s = int(np.clip(rng.lognormal(np.log(mean_min * 60.0), 0.35), 120, 7200))
    distance = round(duration_s / 3600.0 * _SPEED_MPH[borough] * rng.uniform(0.8, 1.2), 2)

    dlon = float(np.clip(lon + rng.normal(0.0, 0.012), _CLIP[0], _CLIP[2]))
    dlat = float(np.clip(lat + rng.normal(0.0, 0.012), _CLIP[1], _CLIP[3]))

    return TripRecord(
        pickup_datetime=pickup_dt,
        dropoff_datetime=pickup_dt + timedelta(seconds=duration_s),
        passenger_count=int(rng.choice([1, 2, 3, 4, 5, 6], p=[0.70, 0.14, 0.07, 0.04, 0.03, 0.02])),
        trip_time_secs=duration_s,
        trip_distance=distance,
        pickup_lon=round(lon, 6),
        pickup_lat=round(lat, 6),
        dropoff_lon=round(dlon, 6),
        dropoff_lat=round(dlat, 6),
    )


_TAXI_BREAKERS = (
    ("passenger_count", ""),            # missing field
    ("trip_distance", "abc"),           # unparseable number
    ("pickup_latitude", "99.0"),        # latitude outside world range
    ("pickup_datetime", "not-a-date"),  # bad timestamp
    ("swap_times", None),               # dropoff before pickup; dropped by clean
)


def _inject(rows: list[list[str]], header: list[str], rng: np.random.Generator,
            n_dup: int, n_bad: int, breakers) -> None:
    """Insert duplicate and malformed rows at seeded positions, in place."""
    if n_dup > 0:
        sources = rng.choice(len(rows), size=min(n_dup, len(rows)), replace=False)
        for src in sorted(sources.tolist(), reverse=True):
            rows.insert(src + 1, list(rows[src]))
    if n_bad > 0:
        sources = rng.choice(len(rows), size=min(n_bad, len(rows)), replace=False)
        for i, src in enumerate(sorted(sources.tolist(), reverse=True)):
            bad = list(rows[src])
            column, value = breakers[i % len(breakers)]
            if column == "swap_times":
                a, b = header.index("pickup_datetime"), header.index("dropoff_datetime")
                bad[a], bad[b] = bad[b], bad[a]
            else:
                bad[header.index(column)] = value
            rows.insert(src + 1, bad)


def make_taxi_csv(
    path: str | Path,
    n_rows: int,
    seed: int,
    malformed_rate: float = 0.0,
    duplicate_rate: float = 0.0,
    start: datetime = datetime(2013, 1, 1),
    n_days: int = 31,
) -> int:
    """Write a synthetic trip CSV in the 2013 TLC column layout.

    Returns the number of data rows written (valid + injected).  Rows are
    grouped by day in calendar order; within a day, times are unsorted just
    as in the raw exports.
    """
    if n_rows < 1:
        raise ValueError("n_rows must be positive")
    rng = np.random.default_rng(seed)
    day_weights = np.array(
        [TAXI_DOW_WEIGHTS[(start + timedelta(days=i)).weekday()] for i in range(n_days)]
    )
    per_day = rng.multinomial(n_rows, day_weights / day_weights.sum())

    header = [TAXI_SCHEMA[logical] for logical in TAXI_SCHEMA]
    rows = []
    for i, count in enumerate(per_day):
        day = start + timedelta(days=i)
        for _ in range(int(count)):
            rows.append(_format_trip_row(_make_trip(rng, day)))

    _inject(
        rows,
        header,
        rng,
        n_dup=int(round(n_rows * duplicate_rate)),
        n_bad=int(round(n_rows * malformed_rate)),
        breakers=_TAXI_BREAKERS,
    )

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return len(rows)


_FOOD_BREAKERS = (
    ("hour_of_day", ""),    # missing field
    ("hour_of_day", "25"),  # out of range
    ("item_count", "0"),    # below minimum
    ("day_of_week", "7"),   # out of range
    ("item_count", "x"),    # unparseable
)


def make_food_csv(
    path: str | Path,
    n_rows: int,
    seed: int,
    malformed_rate: float = 0.0,
    duplicate_rate: float = 0.0,
) -> int:
    """Write a synthetic food-order CSV with Friday/Saturday-heavy demand."""
    if n_rows < 1:
        raise ValueError("n_rows must be positive")
    rng = np.random.default_rng(seed)
    header = [FOOD_SCHEMA[logical] for logical in FOOD_SCHEMA]
    dow_p = FOOD_DOW_WEIGHTS / FOOD_DOW_WEIGHTS.sum()
    hod_p = FOOD_HOUR_WEIGHTS / FOOD_HOUR_WEIGHTS.sum()
    # Popularity is skewed so top-10 rankings have a clear, stable order.
    item_p = 1.0 / np.arange(1, 501) ** 0.8
    item_p /= item_p.sum()
    rest_p = 1.0 / np.arange(1, 301) ** 0.8
    rest_p /= rest_p.sum()

    rows = []
    for _ in range(n_rows):
        rows.append(
            [
                str(int(rng.integers(1, 2001))),
                str(1 + int(rng.choice(500, p=item_p))),
                str(int(rng.integers(1, 41))),
                str(1 + int(rng.choice(300, p=rest_p))),
                str(int(rng.integers(1, 13))),
                str(int(rng.choice(7, p=dow_p))),
                str(int(rng.choice(24, p=hod_p))),
                str(int(rng.choice([1, 2, 3, 4, 5, 6], p=[0.45, 0.25, 0.14, 0.08, 0.05, 0.03]))),
            ]
        )

    _inject(
        rows,
        header,
        rng,
        n_dup=int(round(n_rows * duplicate_rate)),
        n_bad=int(round(n_rows * malformed_rate)),
        breakers=_FOOD_BREAKERS,
    )

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return len(rows)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="python -m mobfc.synth", description="Generate seeded synthetic input fixtures."
    )
    parser.add_argument("out_dir", help="directory to write taxi.csv and food.csv into")
    parser.add_argument("--taxi-rows", type=int, default=10000)
    parser.add_argument("--food-rows", type=int, default=5000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--malformed-rate", type=float, default=0.01)
    parser.add_argument("--duplicate-rate", type=float, default=0.005)
    args = parser.parse_args(argv)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n_taxi = make_taxi_csv(
        out / "taxi.csv", args.taxi_rows, args.seed, args.malformed_rate, args.duplicate_rate
    )
    n_food = make_food_csv(
        out / "food.csv", args.food_rows, args.seed + 1, args.malformed_rate, args.duplicate_rate
    )
    print(f"wrote {out / 'taxi.csv'} ({n_taxi} rows) and {out / 'food.csv'} ({n_food} rows)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
