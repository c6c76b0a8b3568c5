"""Pipeline orchestration: one executable, composable subcommands.

Each stage reads upstream artifacts from the output directory and writes
its own, so `run-all` is literally the stages run in order.  Every run
rewrites the manifest (resolved config, input hashes, versions) so the
outputs carry everything needed to reproduce them.

Exit codes: 0 success, 1 stage failure (including missing upstream
artifacts), 2 missing input file, 3 invalid configuration.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import platform
import sys
from array import array
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .clustering import KMeansConfig, kmeans_fit, subsample_points, write_centroids_csv, write_clusters_csv
from .config import ConfigError, RunConfig, config_dict, resolve_config, run_id
from .eda import correlation_matrix, duration_stats_from_groups, top_n
from .features import derive_features, trip_duration_minutes, write_features_csv
from .fit import OptimizerSettings, fit_mle
from .geospatial import borough_demand, bundled_boroughs_path, load_boroughs_geojson, write_borough_stats_csv
from .ingest import FoodOrderRecord, TripRecord, clean, parse_food_csv, parse_taxi_csv, write_food_csv, write_taxi_csv
from .report import paper_parity_report
from .sarima import SarimaxSpec, forecast, one_step_insample_predictions
from .series import (
    TIMESTAMP_FMT,
    deseasonalize,
    read_series_csv,
    reseasonalize,
    rmse,
    series_from_counts,
    split_train_test,
    write_series_csv,
)

STAGES = ("ingest", "features", "eda", "geo", "cluster", "forecast", "report")


class MissingArtifactError(RuntimeError):
    """An upstream stage's output is required but not present."""


def _require(path: Path, producing_stage: str) -> Path:
    if not path.exists():
        raise MissingArtifactError(
            f"missing artifact {path}; run the '{producing_stage}' stage first"
        )
    return path


def _hash_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _package_version() -> str:
    try:
        from importlib.metadata import version

        return version("mobfc")
    except Exception:
        return "unknown"


def write_manifest(config: RunConfig, out: Path) -> None:
    import matplotlib

    inputs = {}
    boroughs = config.boroughs or str(bundled_boroughs_path())
    for label, value in (
        ("taxi", config.input_taxi),
        ("food", config.input_food),
        ("boroughs", boroughs),
    ):
        if value and Path(value).exists():
            inputs[label] = {"path": value, "sha256": _hash_file(Path(value))}
    manifest = {
        "run_id": run_id(config),
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "config": config_dict(config),
        "inputs": inputs,
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "matplotlib": matplotlib.__version__,
            "mobfc": _package_version(),
        },
    }
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _trips(path: Path):
    for item in parse_taxi_csv(path):
        if isinstance(item, TripRecord):
            yield item


def stage_ingest(config: RunConfig, out: Path, log) -> None:
    if not config.input_taxi:
        raise ConfigError("the ingest stage needs an input: set --input-taxi")
    out.mkdir(parents=True, exist_ok=True)
    stream, report = clean(parse_taxi_csv(config.input_taxi))
    kept = write_taxi_csv(stream, out / "cleaned_trips.csv")
    report.to_json(out / "cleaning_report_taxi.json")
    log(f"ingest: kept {kept}/{report.rows_read} trip rows -> {out / 'cleaned_trips.csv'}")
    if config.input_food:
        stream, report = clean(parse_food_csv(config.input_food), bbox=None)
        kept = write_food_csv(stream, out / "cleaned_food.csv")
        report.to_json(out / "cleaning_report_food.json")
        log(f"ingest: kept {kept}/{report.rows_read} food rows -> {out / 'cleaned_food.csv'}")


def stage_features(config: RunConfig, out: Path, log) -> None:
    src = _require(out / "cleaned_trips.csv", "ingest")
    hour_counts: dict[datetime, int] = {}
    consistency = {"records": 0, "mismatched": 0, "total_abs": 0.0, "max_abs": 0.0}

    def feature_rows():
        for r in _trips(src):
            bucket = r.pickup_datetime.replace(minute=0, second=0, microsecond=0)
            hour_counts[bucket] = hour_counts.get(bucket, 0) + 1
            diff = abs(
                trip_duration_minutes(r.pickup_datetime, r.dropoff_datetime) * 60.0
                - r.trip_time_secs
            )
            consistency["records"] += 1
            consistency["total_abs"] += diff
            consistency["max_abs"] = max(consistency["max_abs"], diff)
            if diff > 0:
                consistency["mismatched"] += 1
            yield derive_features(r)

    n = write_features_csv(feature_rows(), out / "features.csv")
    if n == 0:
        raise RuntimeError(f"no valid trips in {src}")
    write_series_csv(series_from_counts(hour_counts, "day"), out / "demand_day.csv")
    write_series_csv(series_from_counts(hour_counts, "hour"), out / "demand_hour.csv")
    summary = {
        "rows": n,
        "duration_consistency": {
            "records": consistency["records"],
            "mismatched": consistency["mismatched"],
            "mean_abs_diff_secs": consistency["total_abs"] / n,
            "max_abs_diff_secs": consistency["max_abs"],
        },
    }
    with open(out / "features_summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    log(f"features: {n} rows -> {out / 'features.csv'}, demand series day/hour")


def _write_counts(path: Path, label: str, counts: dict) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([label, "count"])
        for key in sorted(counts):
            writer.writerow([key, counts[key]])


def _write_grouped(path: Path, label: str, stats) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([label, "count", "mean", "median", "p25", "p75"])
        for s in stats:
            writer.writerow(
                [s.group_key, s.count, repr(s.mean), repr(s.median), repr(s.p25), repr(s.p75)]
            )


def stage_eda(config: RunConfig, out: Path, log) -> None:
    from .features import read_features_csv

    src = _require(out / "features.csv", "features")
    eda_dir = out / "eda"
    eda_dir.mkdir(parents=True, exist_ok=True)

    hod: dict[int, int] = {h: 0 for h in range(24)}
    dow: dict[int, int] = {d: 0 for d in range(7)}
    day: dict[int, int] = {}
    dropoff_hod: dict[int, int] = {h: 0 for h in range(24)}
    passengers: dict[int, int] = {}
    dur_by_dow: dict[int, array] = {}
    dur_by_hod: dict[int, array] = {}
    columns = {
        name: array("d")
        for name in ("trip_duration_min", "trip_distance", "passenger_count", "pickup_hour", "pickup_dow")
    }

    n = 0
    for row in read_features_csv(src):
        n += 1
        hod[row.pickup_hour] += 1
        dow[row.pickup_dow] += 1
        day[row.pickup_day] = day.get(row.pickup_day, 0) + 1
        dropoff_hod[row.dropoff_hour] += 1
        passengers[row.passenger_count] = passengers.get(row.passenger_count, 0) + 1
        if row.trip_duration_min <= config.max_duration_min:
            dur_by_dow.setdefault(row.pickup_dow, array("d")).append(row.trip_duration_min)
            dur_by_hod.setdefault(row.pickup_hour, array("d")).append(row.trip_duration_min)
        columns["trip_duration_min"].append(row.trip_duration_min)
        columns["trip_distance"].append(row.trip_distance)
        columns["passenger_count"].append(row.passenger_count)
        columns["pickup_hour"].append(row.pickup_hour)
        columns["pickup_dow"].append(row.pickup_dow)
    if n == 0:
        raise RuntimeError(f"no feature rows in {src}")

    _write_counts(eda_dir / "demand_by_hour.csv", "hour", hod)
    _write_counts(eda_dir / "demand_by_dow.csv", "dow", dow)
    _write_counts(eda_dir / "demand_by_day.csv", "day", day)
    _write_counts(eda_dir / "passenger_hist.csv", "passengers", passengers)
    with open(eda_dir / "hourly_pickup_dropoff.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["hour", "pickups", "dropoffs"])
        for h in range(24):
            writer.writerow([h, hod[h], dropoff_hod[h]])
    _write_grouped(eda_dir / "duration_by_dow.csv", "dow", duration_stats_from_groups(dur_by_dow))
    _write_grouped(eda_dir / "duration_by_hod.csv", "hod", duration_stats_from_groups(dur_by_hod))

    matrix = correlation_matrix({name: np.frombuffer(col, dtype=float) for name, col in columns.items()})
    with open(eda_dir / "correlation.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["column", *matrix.labels])
        for label, row in zip(matrix.labels, matrix.values):
            writer.writerow([label, *[repr(float(v)) for v in row]])

    summary = {
        "rows": n,
        "busiest_hour": max(hod, key=lambda h: (hod[h], -h)),
        "busiest_dow": max(dow, key=lambda d: (dow[d], -d)),
        "mean_duration_min": float(np.frombuffer(columns["trip_duration_min"], dtype=float).mean()),
    }

    food_src = out / "cleaned_food.csv"
    if food_src.exists():
        food_dow: dict[int, int] = {d: 0 for d in range(7)}
        food_hod: dict[int, int] = {h: 0 for h in range(24)}
        items: dict[int, int] = {}
        n_food = 0
        for item in parse_food_csv(food_src):
            if not isinstance(item, FoodOrderRecord):
                continue
            n_food += 1
            food_dow[item.day_of_week] += 1
            food_hod[item.hour_of_day] += 1
            items[item.item_id] = items.get(item.item_id, 0) + 1
        _write_counts(eda_dir / "food_by_dow.csv", "dow", food_dow)
        _write_counts(eda_dir / "food_by_hour.csv", "hour", food_hod)
        with open(eda_dir / "food_top_items.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["item_id", "count"])
            for item_id, count in top_n(items, 10):
                writer.writerow([item_id, count])
        summary["food_rows"] = n_food
        summary["food_busiest_dow"] = max(food_dow, key=lambda d: (food_dow[d], -d))

    with open(eda_dir / "eda_summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    log(f"eda: {n} rows summarized -> {eda_dir}")


def stage_geo(config: RunConfig, out: Path, log) -> None:
    from .features import read_features_csv

    src = _require(out / "features.csv", "features")
    geo_dir = out / "geo"
    geo_dir.mkdir(parents=True, exist_ok=True)
    boroughs_path = Path(config.boroughs) if config.boroughs else bundled_boroughs_path()
    polygons = load_boroughs_geojson(boroughs_path)
    stats = borough_demand(read_features_csv(src), polygons)
    write_borough_stats_csv(stats, geo_dir / "borough_stats.csv")
    log(f"geo: {len(polygons)} areas -> {geo_dir / 'borough_stats.csv'}")


def stage_cluster(config: RunConfig, out: Path, log) -> None:
    src = _require(out / "cleaned_trips.csv", "ingest")
    cluster_dir = out / "cluster"
    cluster_dir.mkdir(parents=True, exist_ok=True)
    lons = array("d")
    lats = array("d")
    for r in _trips(src):
        lons.append(r.pickup_lon)
        lats.append(r.pickup_lat)
    points = np.column_stack([np.frombuffer(lons, dtype=float), np.frombuffer(lats, dtype=float)])
    if len(points) < config.k:
        raise RuntimeError(f"only {len(points)} points for k={config.k} clusters")
    sampled = subsample_points(points, config.subsample, config.seed)
    model = kmeans_fit(sampled, KMeansConfig(k=config.k, seed=config.seed))
    write_clusters_csv(sampled, model.assignments, cluster_dir / "clusters.csv")
    write_centroids_csv(model.centroids, cluster_dir / "centroids.csv")
    sizes = np.bincount(model.assignments, minlength=config.k)
    summary = {
        "k": config.k,
        "seed": config.seed,
        "inertia": model.inertia,
        "n_iter": model.n_iter,
        "points_clustered": int(len(sampled)),
        "points_total": int(len(points)),
        "cluster_sizes": [int(s) for s in sizes],
    }
    with open(cluster_dir / "cluster_summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    log(f"cluster: k={config.k} inertia={model.inertia:.4f} -> {cluster_dir}")


def stage_forecast(config: RunConfig, out: Path, log) -> None:
    demand_path = _require(out / f"demand_{config.granularity}.csv", "features")
    fc_dir = out / "forecast"
    fc_dir.mkdir(parents=True, exist_ok=True)
    series = read_series_csv(demand_path, config.granularity)
    train, test = split_train_test(series, config.split)
    write_series_csv(train, fc_dir / "train.csv")
    write_series_csv(test, fc_dir / "test.csv")

    spec = SarimaxSpec(
        p=config.p, d=config.d, q=config.q,
        P=config.sp, D=config.sd, Q=config.sq, s=config.s,
        with_constant=config.with_constant,
    )
    settings = OptimizerSettings(
        max_evals=config.max_evals,
        tolerance=config.tolerance,
        restarts=config.restarts,
        seed=config.seed,
    )
    threads = config.threads or os.cpu_count() or 1
    horizon = config.horizon or len(test)

    period = config.s if config.s >= 2 else 7
    if config.deseasonalize:
        adjusted_train, seasonal = deseasonalize(train, period=period)
        result = fit_mle(spec, adjusted_train, settings, threads=threads)
        offset = spec.d + spec.s * spec.D
        preds, _ = one_step_insample_predictions(spec, result.params, adjusted_train.as_array())
        raw_preds = reseasonalize(preds, seasonal, offset=offset)
        result.rmse_in_sample = rmse(raw_preds, train.as_array()[offset:])
        fc = forecast(spec, result.params, adjusted_train, horizon=horizon)
        points = reseasonalize(fc.points, seasonal, offset=len(train))
        lo95 = reseasonalize(fc.lo95, seasonal, offset=len(train))
        hi95 = reseasonalize(fc.hi95, seasonal, offset=len(train))
        result.rmse_out_of_sample = rmse(points[: len(test)], test.as_array())
    else:
        result = fit_mle(spec, train, settings, holdout=test, threads=threads)
        fc = forecast(spec, result.params, train, horizon=horizon)
        points, lo95, hi95 = fc.points, fc.lo95, fc.hi95

    with open(fc_dir / "forecast.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", "forecast", "lo95", "hi95"])
        start = train.start + len(train) * train.step
        for i in range(horizon):
            stamp = (start + i * train.step).strftime(TIMESTAMP_FMT)
            writer.writerow([stamp, repr(float(points[i])), repr(float(lo95[i])), repr(float(hi95[i]))])

    if len(series) >= 2 * period:
        adjusted_full, _ = deseasonalize(series, period=period)
        write_series_csv(adjusted_full, fc_dir / "detrended.csv")

    doc = result.to_json()
    doc.update(
        {
            "train_length": len(train),
            "test_length": len(test),
            "horizon": horizon,
            "granularity": config.granularity,
            "deseasonalize": config.deseasonalize,
        }
    )
    with open(fc_dir / "fit.json", "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    log(
        "forecast: loglik=%.4f rmse_in=%.4f rmse_out=%s -> %s"
        % (
            result.loglik,
            result.rmse_in_sample,
            "%.4f" % result.rmse_out_of_sample if result.rmse_out_of_sample is not None else "n/a",
            fc_dir,
        )
    )


def stage_report(config: RunConfig, out: Path, log) -> None:
    report_dir = paper_parity_report(out, run_id=run_id(config))
    index = json.loads((report_dir / "index.json").read_text())
    present = sum(1 for a in index["artifacts"] if a["status"] == "present")
    log(f"report: {present} artifacts -> {report_dir}")


_STAGE_FUNCS = {
    "ingest": stage_ingest,
    "features": stage_features,
    "eda": stage_eda,
    "geo": stage_geo,
    "cluster": stage_cluster,
    "forecast": stage_forecast,
    "report": stage_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file")
    common.add_argument("--input-taxi", dest="input_taxi", help="raw trip CSV (or .gz)")
    common.add_argument("--input-food", dest="input_food", help="raw food-order CSV (or .gz)")
    common.add_argument("--boroughs", help="GeoJSON of area outlines (default: bundled)")
    common.add_argument("--out", help="output directory (default: out)")
    common.add_argument("--split", type=float, help="train fraction in (0,1), default 0.8")
    common.add_argument("--k", type=int, help="cluster count, default 15")
    common.add_argument("--seed", type=int, help="root seed, default 0")
    common.add_argument("--granularity", choices=("day", "hour"), help="demand bucket size")
    common.add_argument("--horizon", type=int, help="forecast steps (default: test span)")
    common.add_argument(
        "--deseasonalize", action="store_true", default=None,
        help="fit on the seasonally adjusted series",
    )
    common.add_argument("--threads", type=int, help="worker threads (default: all cores)")
    common.add_argument("--quiet", action="store_true", default=None, help="suppress progress output")

    parser = argparse.ArgumentParser(
        prog="mobfc",
        description="Urban mobility demand analysis: ingest, explore, cluster, forecast, report.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "ingest": "parse and clean the raw CSVs",
        "features": "derive calendar features and demand series",
        "eda": "descriptive statistics and correlations",
        "geo": "assign pickups to areas and aggregate",
        "cluster": "k-means over pickup coordinates",
        "forecast": "fit the seasonal model and forecast demand",
        "report": "render figures and tables from stage outputs",
        "run-all": "run every stage in order",
    }
    for name, desc in descriptions.items():
        sub.add_parser(name, parents=[common], help=desc, description=desc)
    return parser


_FLAG_KEYS = (
    "input_taxi", "input_food", "boroughs", "out", "split", "k", "seed",
    "granularity", "horizon", "deseasonalize", "threads", "quiet",
)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    flags = {key: getattr(args, key) for key in _FLAG_KEYS if getattr(args, key) is not None}
    try:
        config = resolve_config(args.config, flags)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    out = Path(config.out)
    log = (lambda _msg: None) if config.quiet else print
    stages = list(STAGES) if args.command == "run-all" else [args.command]
    try:
        write_manifest(config, out)
        for stage in stages:
            _STAGE_FUNCS[stage](config, out, log)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MissingArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"error in stage: {exc}", file=sys.stderr)
        return 1
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
