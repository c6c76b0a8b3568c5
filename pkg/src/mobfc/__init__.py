"""Urban mobility demand analysis: ingest, features, EDA, geospatial
aggregation, clustering, seasonal forecasting, and report rendering."""

from .chart import ChartSpec, LineSeries, render_svg
from .clustering import KMeansConfig, KMeansModel, kmeans_fit, kmeans_pp_init, kmeans_predict
from .config import ConfigError, RunConfig, resolve_config, run_id
from .eda import (
    CorrelationMatrix,
    GroupedStat,
    Histogram,
    categorical_histogram,
    correlation_matrix,
    demand_by_key,
    grouped_duration_stats,
    histogram,
    pearson_correlation,
    top_n,
)
from .features import FeatureRow, derive_features, trip_duration_minutes
from .fit import FitResult, OptimizerSettings, fit_mle
from .geospatial import (
    BoroughPolygon,
    BoroughStats,
    assign_borough,
    borough_demand,
    bundled_boroughs_path,
    load_boroughs_geojson,
    point_in_polygon,
)
from .ingest import (
    CleaningReport,
    FoodOrderRecord,
    RowError,
    SchemaError,
    TripRecord,
    clean,
    parse_food_csv,
    parse_taxi_csv,
)
from .report import (
    REFERENCE_RMSE_IN_SAMPLE,
    REFERENCE_RMSE_OUT_OF_SAMPLE,
    paper_parity_report,
)
from .sarima import (
    ForecastResult,
    KalmanResult,
    NonStationaryError,
    NumericalError,
    SarimaxParams,
    SarimaxSpec,
    StateSpace,
    build_state_space,
    constrain_params,
    forecast,
    kalman_loglik,
    simulate_sarma,
    unconstrain_params,
)
from .series import (
    TimeSeries,
    aggregate_counts,
    deseasonalize,
    reseasonalize,
    rmse,
    split_train_test,
)

__version__ = "0.1.0"

__all__ = [
    "ChartSpec",
    "LineSeries",
    "render_svg",
    "KMeansConfig",
    "KMeansModel",
    "kmeans_fit",
    "kmeans_pp_init",
    "kmeans_predict",
    "ConfigError",
    "RunConfig",
    "resolve_config",
    "run_id",
    "CorrelationMatrix",
    "GroupedStat",
    "Histogram",
    "categorical_histogram",
    "correlation_matrix",
    "demand_by_key",
    "grouped_duration_stats",
    "histogram",
    "pearson_correlation",
    "top_n",
    "FeatureRow",
    "derive_features",
    "trip_duration_minutes",
    "FitResult",
    "OptimizerSettings",
    "fit_mle",
    "BoroughPolygon",
    "BoroughStats",
    "assign_borough",
    "borough_demand",
    "bundled_boroughs_path",
    "load_boroughs_geojson",
    "point_in_polygon",
    "CleaningReport",
    "FoodOrderRecord",
    "RowError",
    "SchemaError",
    "TripRecord",
    "clean",
    "parse_food_csv",
    "parse_taxi_csv",
    "REFERENCE_RMSE_IN_SAMPLE",
    "REFERENCE_RMSE_OUT_OF_SAMPLE",
    "paper_parity_report",
    "ForecastResult",
    "KalmanResult",
    "NonStationaryError",
    "NumericalError",
    "SarimaxParams",
    "SarimaxSpec",
    "StateSpace",
    "build_state_space",
    "constrain_params",
    "forecast",
    "kalman_loglik",
    "simulate_sarma",
    "unconstrain_params",
    "TimeSeries",
    "aggregate_counts",
    "deseasonalize",
    "reseasonalize",
    "rmse",
    "split_train_test",
    "__version__",
]
