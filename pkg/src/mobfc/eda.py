"""Descriptive statistics: distributions, correlations, rankings, grouped stats."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

# Durations beyond this are raw-data pathologies that would dominate means.
DEFAULT_MAX_DURATION_MIN = 180.0

KEY_DOMAINS = {"dow": range(0, 7), "hod": range(0, 24), "day": range(1, 32)}

# Attribute holding each grouping key, per record flavour.
_KEY_ATTRS = {
    "dow": ("day_of_week", "pickup_dow"),
    "hod": ("hour_of_day", "pickup_hour"),
    "day": ("pickup_day",),
}


class ZeroVarianceError(ValueError):
    """Correlation is undefined when an input has no variance."""


@dataclass(frozen=True)
class Histogram:
    bin_edges: tuple  # numeric edges (len = bins+1) or categorical labels (len = bins)
    counts: tuple[int, ...]
    total: int
    categorical: bool = False


@dataclass
class CorrelationMatrix:
    labels: tuple[str, ...]
    values: np.ndarray  # square, symmetric, unit diagonal; nan marks undefined cells


@dataclass(frozen=True)
class GroupedStat:
    group_key: int
    count: int
    mean: float
    median: float
    p25: float
    p75: float


def histogram(values: Sequence[float], bins) -> Histogram:
    """Half-open bins [lo, hi), last bin closed; `bins` is a count or edges."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise ValueError("cannot histogram an empty input")
    counts, edges = np.histogram(arr, bins=bins)
    return Histogram(bin_edges=tuple(edges.tolist()), counts=tuple(int(c) for c in counts), total=int(arr.size))


def categorical_histogram(values: Iterable) -> Histogram:
    """One bin per distinct value, labels in ascending order."""
    values = list(values)
    if not values:
        raise ValueError("cannot histogram an empty input")
    counts: dict = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    labels = sorted(counts)
    return Histogram(
        bin_edges=tuple(labels),
        counts=tuple(counts[lab] for lab in labels),
        total=len(values),
        categorical=True,
    )


def pearson_correlation(x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError(f"need two equal-length vectors of size >= 2, got {x.shape} vs {y.shape}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVarianceError("correlation undefined for a zero-variance input")
    return float(np.dot(dx, dy)) / float(np.sqrt(sxx * syy))


def correlation_matrix(columns: Mapping[str, Sequence[float]]) -> CorrelationMatrix:
    """Pairwise Pearson over named columns; undefined cells come back NaN.

    Symmetric by construction with an exactly-unit diagonal.
    """
    labels = tuple(columns)
    data = [np.asarray(columns[name], dtype=float) for name in labels]
    n = len(labels)
    if n == 0:
        raise ValueError("no columns given")
    lengths = {len(col) for col in data}
    if len(lengths) != 1:
        raise ValueError(f"columns differ in length: {sorted(lengths)}")
    values = np.ones((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            try:
                r = pearson_correlation(data[i], data[j])
            except ZeroVarianceError:
                r = float("nan")
            values[i, j] = r
            values[j, i] = r
    return CorrelationMatrix(labels=labels, values=values)


def _key_value(record, key: str) -> int:
    for attr in _KEY_ATTRS[key]:
        v = getattr(record, attr, None)
        if v is not None:
            return v
    raise AttributeError(f"record {type(record).__name__} has no {key!r} key")


def demand_by_key(records: Iterable, key: str) -> dict[int, int]:
    """Counts over the full key domain (zero-filled), keyed dow/hod/day."""
    if key not in KEY_DOMAINS:
        raise ValueError(f"key must be one of {sorted(KEY_DOMAINS)}, got {key!r}")
    counts = {k: 0 for k in KEY_DOMAINS[key]}
    for r in records:
        counts[_key_value(r, key)] += 1
    return counts


def top_n(counts: Mapping, n: int) -> list[tuple]:
    """Top-n (id, count) pairs, descending by count, ties by ascending id."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:n]


def grouped_duration_stats(
    rows: Iterable,
    key: str,
    max_duration_min: float | None = DEFAULT_MAX_DURATION_MIN,
) -> list[GroupedStat]:
    """Per-group duration stats (count/mean/median/p25/p75) keyed dow or hod.

    Quantiles use the lower-interpolation (nearest-rank) convention.
    Durations above `max_duration_min` are excluded as outliers.
    """
    if key not in ("dow", "hod"):
        raise ValueError(f"key must be 'dow' or 'hod', got {key!r}")
    groups: dict[int, list[float]] = {}
    for r in rows:
        d = r.trip_duration_min
        if max_duration_min is not None and d > max_duration_min:
            continue
        groups.setdefault(_key_value(r, key), []).append(d)
    return duration_stats_from_groups(groups)


def duration_stats_from_groups(groups: Mapping[int, Sequence[float]]) -> list[GroupedStat]:
    """GroupedStat per key from already-collected duration groups."""
    out = []
    for g in sorted(groups):
        arr = np.asarray(groups[g], dtype=float)
        out.append(
            GroupedStat(
                group_key=g,
                count=int(arr.size),
                mean=float(arr.mean()),
                median=float(np.percentile(arr, 50, method="lower")),
                p25=float(np.percentile(arr, 25, method="lower")),
                p75=float(np.percentile(arr, 75, method="lower")),
            )
        )
    return out
