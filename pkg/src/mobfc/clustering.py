"""K-means over trip coordinates: k-means++ seeding plus Lloyd iterations."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np


@dataclass(frozen=True)
class KMeansConfig:
    k: int = 15
    max_iter: int = 300
    tol: float = 1e-6  # max centroid shift (degrees) treated as converged
    seed: int = 0
    init: object = "kmeans++"  # "kmeans++" or an explicit (k, 2) centroid array

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be positive, got {self.k}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be positive, got {self.max_iter}")


@dataclass
class KMeansModel:
    centroids: np.ndarray  # (k, 2) lon/lat
    inertia: float
    n_iter: int
    assignments: np.ndarray  # (n,) cluster index per input point
    seed: int = 0
    inertia_history: list[float] = field(default_factory=list)


def _squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """(n, k) squared Euclidean distances."""
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def kmeans_pp_init(points: np.ndarray, k: int, seed: int) -> np.ndarray:
    """k-means++ seeding: first centroid uniform, then proportional to the
    squared distance to the nearest chosen centroid.  Deterministic per seed.
    """
    points = np.asarray(points, dtype=float)
    n_distinct = len(np.unique(points, axis=0))
    if n_distinct < k:
        raise ValueError(f"need at least k={k} distinct points, have {n_distinct}")
    rng = np.random.default_rng(seed)
    chosen = [int(rng.integers(len(points)))]
    d2 = np.sum((points - points[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        probs = d2 / d2.sum()
        idx = int(rng.choice(len(points), p=probs))
        chosen.append(idx)
        d2 = np.minimum(d2, np.sum((points - points[idx]) ** 2, axis=1))
    return points[chosen].copy()


def kmeans_fit(points: np.ndarray, config: KMeansConfig = KMeansConfig()) -> KMeansModel:
    """Lloyd's algorithm until the max centroid shift drops below tol.

    Ties in assignment go to the lowest centroid index.  An emptied cluster
    is re-seeded at the point farthest from its assigned centroid.  Inertia
    is checked to be non-increasing on every iteration.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or len(points) == 0:
        raise ValueError("points must be a nonempty (n, d) array")
    k = config.k
    if isinstance(config.init, str):
        if config.init != "kmeans++":
            raise ValueError(f"unknown init {config.init!r}")
        centroids = kmeans_pp_init(points, k, config.seed)
    else:
        centroids = np.array(config.init, dtype=float)
        if centroids.shape != (k, points.shape[1]):
            raise ValueError(f"provided centroids must be shaped ({k}, {points.shape[1]})")

    history: list[float] = []
    assignments = np.zeros(len(points), dtype=int)
    n_iter = 0
    for n_iter in range(1, config.max_iter + 1):
        d2 = _squared_distances(points, centroids)
        assignments = np.argmin(d2, axis=1)  # argmin takes the lowest index on ties
        inertia = float(d2[np.arange(len(points)), assignments].sum())
        if history and inertia > history[-1] * (1 + 1e-12) + 1e-12:
            raise AssertionError(f"inertia increased: {history[-1]} -> {inertia}")
        history.append(inertia)

        new_centroids = centroids.copy()
        for j in range(k):
            members = assignments == j
            if members.any():
                new_centroids[j] = points[members].mean(axis=0)
            else:
                # Re-seed an empty cluster at the point farthest from its
                # currently assigned centroid.
                farthest = int(np.argmax(d2[np.arange(len(points)), assignments]))
                new_centroids[j] = points[farthest]
        shift = float(np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max())
        centroids = new_centroids
        if shift < config.tol:
            break

    # Final assignment against the converged centroids.
    d2 = _squared_distances(points, centroids)
    assignments = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(len(points)), assignments].sum())
    return KMeansModel(
        centroids=centroids,
        inertia=inertia,
        n_iter=n_iter,
        assignments=assignments,
        seed=config.seed,
        inertia_history=history,
    )


def kmeans_predict(model: KMeansModel, point) -> int:
    """Index of the nearest centroid; ties go to the lowest index."""
    p = np.asarray(point, dtype=float).reshape(1, -1)
    return int(np.argmin(_squared_distances(p, model.centroids)[0]))


def subsample_points(points: np.ndarray, max_points: int, seed: int) -> np.ndarray:
    """Seeded uniform subsample (without replacement) to bound fit cost."""
    points = np.asarray(points, dtype=float)
    if len(points) <= max_points:
        return points
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(points), size=max_points, replace=False)
    idx.sort()
    return points[idx]


def write_clusters_csv(points: np.ndarray, assignments: np.ndarray, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["point_lon", "point_lat", "cluster"])
        for (lon, lat), c in zip(np.asarray(points, dtype=float), assignments):
            w.writerow([repr(float(lon)), repr(float(lat)), str(int(c))])


def write_centroids_csv(centroids: np.ndarray, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["cluster", "lon", "lat"])
        for j, (lon, lat) in enumerate(np.asarray(centroids, dtype=float)):
            w.writerow([str(j), repr(float(lon)), repr(float(lat))])


def read_clusters_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    pts: list[tuple[float, float]] = []
    assign: list[int] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for lon, lat, c in reader:
            pts.append((float(lon), float(lat)))
            assign.append(int(c))
    return np.asarray(pts), np.asarray(assign, dtype=int)
