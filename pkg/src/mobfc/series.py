"""Evenly spaced demand series: aggregation, seasonal adjustment, splits."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

TIMESTAMP_FMT = "%Y-%m-%d %H:%M:%S"

_STEPS = {"day": timedelta(days=1), "hour": timedelta(hours=1)}


@dataclass(frozen=True)
class TimeSeries:
    """Gap-free observations at a fixed granularity starting at `start`."""

    start: datetime
    granularity: str  # "day" | "hour"
    values: tuple[float, ...]

    def __post_init__(self):
        if self.granularity not in _STEPS:
            raise ValueError(f"granularity must be 'day' or 'hour', got {self.granularity!r}")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def step(self) -> timedelta:
        return _STEPS[self.granularity]

    def timestamps(self) -> list[datetime]:
        return [self.start + i * self.step for i in range(len(self.values))]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


def _bucket(ts: datetime, granularity: str) -> datetime:
    if granularity == "day":
        return ts.replace(hour=0, minute=0, second=0, microsecond=0)
    return ts.replace(minute=0, second=0, microsecond=0)


def series_from_counts(counts: dict, granularity: str = "day") -> TimeSeries:
    """Build a gap-free series from a timestamp -> count mapping.

    Keys may be at any finer resolution; they are re-bucketed (summing) to
    the requested granularity and interior gaps are zero-filled.
    """
    if granularity not in _STEPS:
        raise ValueError(f"granularity must be 'day' or 'hour', got {granularity!r}")
    if not counts:
        raise ValueError("cannot aggregate an empty record stream")
    bucketed: dict[datetime, float] = {}
    for ts, count in counts.items():
        b = _bucket(ts, granularity)
        bucketed[b] = bucketed.get(b, 0.0) + count
    start = min(bucketed)
    end = max(bucketed)
    step = _STEPS[granularity]
    n = int(round((end - start) / step)) + 1
    values = tuple(float(bucketed.get(start + i * step, 0.0)) for i in range(n))
    return TimeSeries(start=start, granularity=granularity, values=values)


def aggregate_counts(records: Iterable, granularity: str = "day") -> TimeSeries:
    """Count records per day/hour bucket, zero-filling interior gaps.

    `records` may be datetimes or anything carrying a `pickup_datetime`.
    """
    if granularity not in _STEPS:
        raise ValueError(f"granularity must be 'day' or 'hour', got {granularity!r}")
    counts: dict[datetime, int] = {}
    for r in records:
        ts = getattr(r, "pickup_datetime", r)
        b = _bucket(ts, granularity)
        counts[b] = counts.get(b, 0) + 1
    return series_from_counts(counts, granularity)


def deseasonalize(series: TimeSeries, period: int = 7) -> tuple[TimeSeries, tuple[float, ...]]:
    """Remove the mean-zero periodic component of day-of-cycle means.

    Returns (adjusted, seasonal) where seasonal[j] is the mean of values at
    positions congruent to j mod `period`, recentered so the component sums
    to zero.  `adjusted[i] + seasonal[i % period]` reproduces the input.
    """
    n = len(series)
    if n < 2 * period:
        raise ValueError(f"need at least {2 * period} points to estimate a period-{period} component, got {n}")
    values = series.as_array()
    raw = np.array([values[j::period].mean() for j in range(period)])
    seasonal = raw - raw.mean()
    adjusted = values - seasonal[np.arange(n) % period]
    return (
        TimeSeries(
            start=series.start,
            granularity=series.granularity,
            values=tuple(float(v) for v in adjusted),
        ),
        tuple(float(v) for v in seasonal),
    )


def reseasonalize(values: Sequence[float], seasonal: Sequence[float], offset: int) -> np.ndarray:
    """Add the seasonal component back, for positions starting at `offset`."""
    seasonal = np.asarray(seasonal, dtype=float)
    idx = (offset + np.arange(len(values))) % len(seasonal)
    return np.asarray(values, dtype=float) + seasonal[idx]


def split_train_test(series: TimeSeries, ratio: float) -> tuple[TimeSeries, TimeSeries]:
    """Chronological split: first floor(ratio*n) points train, rest test."""
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"split ratio must lie in (0, 1), got {ratio}")
    n = len(series)
    if n < 2:
        raise ValueError(f"cannot split a series of length {n}")
    n_train = int(ratio * n)
    if n_train == 0 or n_train == n:
        raise ValueError(f"ratio {ratio} leaves an empty side for length {n}")
    train = TimeSeries(series.start, series.granularity, series.values[:n_train])
    test = TimeSeries(series.start + n_train * series.step, series.granularity, series.values[n_train:])
    return train, test


def rmse(predicted: Sequence[float], actual: Sequence[float]) -> float:
    """Root mean squared error between two equal-length vectors."""
    p = np.asarray(predicted, dtype=float)
    a = np.asarray(actual, dtype=float)
    if p.shape != a.shape or p.size == 0:
        raise ValueError(f"rmse needs equal nonzero lengths, got {p.shape} vs {a.shape}")
    return float(np.sqrt(np.mean((p - a) ** 2)))


def write_series_csv(series: TimeSeries, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "value"])
        for ts, v in zip(series.timestamps(), series.values):
            w.writerow([ts.strftime(TIMESTAMP_FMT), repr(v)])


def read_series_csv(path: str | Path, granularity: str | None = None) -> TimeSeries:
    """Read a timestamp,value CSV written by `write_series_csv`.

    Granularity is inferred from the first two timestamps unless given.
    """
    stamps: list[datetime] = []
    values: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["timestamp", "value"]:
            raise ValueError(f"{path}: expected a timestamp,value header")
        for row in reader:
            stamps.append(datetime.strptime(row[0], TIMESTAMP_FMT))
            values.append(float(row[1]))
    if not stamps:
        raise ValueError(f"{path}: empty series")
    if granularity is None:
        if len(stamps) >= 2 and stamps[1] - stamps[0] == _STEPS["hour"]:
            granularity = "hour"
        else:
            granularity = "day"
    return TimeSeries(start=stamps[0], granularity=granularity, values=tuple(values))
