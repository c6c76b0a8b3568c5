"""Maximum-likelihood fitting of the seasonal ARIMA model.

Optimization runs in the unconstrained parameterization (so every candidate
the simplex proposes is stationary and invertible by construction) with a
deterministic smart start plus seeded random restarts.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .sarima import (
    SarimaxParams,
    SarimaxSpec,
    build_state_space,
    constrain_params,
    difference,
    forecast,
    kalman_loglik,
    one_step_insample_predictions,
)
from .series import TimeSeries, rmse
from .simplex import nelder_mead


@dataclass(frozen=True)
class OptimizerSettings:
    max_evals: int = 600
    tolerance: float = 1e-7
    restarts: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.max_evals < 1:
            raise ValueError("max_evals must be positive")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")


@dataclass
class FitResult:
    spec: SarimaxSpec
    params: SarimaxParams
    loglik: float
    converged: bool
    n_evals: int
    rmse_in_sample: float
    rmse_out_of_sample: float | None = None
    best_restart: int = 0
    restart_logliks: list[float] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "order": [self.spec.p, self.spec.d, self.spec.q],
            "seasonal_order": [self.spec.P, self.spec.D, self.spec.Q, self.spec.s],
            "with_constant": self.spec.with_constant,
            "params": {
                "ar": list(self.params.ar),
                "ma": list(self.params.ma),
                "seasonal_ar": list(self.params.sar),
                "seasonal_ma": list(self.params.sma),
                "sigma2": self.params.sigma2,
                "const": self.params.const,
            },
            "loglik": self.loglik,
            "converged": self.converged,
            "n_evals": self.n_evals,
            "rmse_in_sample": self.rmse_in_sample,
            "rmse_out_of_sample": self.rmse_out_of_sample,
            "best_restart": self.best_restart,
            "restart_logliks": self.restart_logliks,
        }


def _smart_start(spec: SarimaxSpec, w: np.ndarray) -> np.ndarray:
    """Zero coefficients, variance matched to the data, mean as constant."""
    z0 = np.zeros(spec.n_params)
    centered = w - np.mean(w) if spec.with_constant else w
    var = float(np.var(centered))
    z0[spec.p + spec.q + spec.P + spec.Q] = np.log(var) if var > 0 else 0.0
    if spec.with_constant:
        z0[-1] = float(np.mean(w))
    return z0


def negative_loglik(z: np.ndarray, spec: SarimaxSpec, w: np.ndarray) -> float:
    """Objective for the simplex; out-of-domain proposals map to +inf."""
    try:
        params = constrain_params(z, spec)
        ss = build_state_space(spec, params)
        return -kalman_loglik(ss, w).loglik
    except (ValueError, RuntimeError, np.linalg.LinAlgError):
        return float("inf")


def fit_mle(
    spec: SarimaxSpec,
    series: TimeSeries | np.ndarray,
    optimizer: OptimizerSettings | None = None,
    holdout: TimeSeries | np.ndarray | None = None,
    threads: int = 1,
) -> FitResult:
    """Fit by exact maximum likelihood with Nelder-Mead restarts.

    Restart 0 starts from the smart start; restarts 1..r-1 perturb it with
    seeded Gaussian noise.  The best final log-likelihood wins, ties going
    to the lowest restart index, so the result is identical whether the
    restarts run sequentially or on a thread pool.  rmse_in_sample scores
    the one-step-ahead predictions; when a holdout is given,
    rmse_out_of_sample scores point forecasts over its full length.
    """
    settings = optimizer or OptimizerSettings()
    values = series.as_array() if isinstance(series, TimeSeries) else np.asarray(series, dtype=float)
    if values.ndim != 1:
        raise ValueError("series must be one-dimensional")
    w = difference(values, spec.d, spec.D, spec.s)
    if w.size < spec.state_dim + 5:
        raise ValueError(
            f"need at least {spec.state_dim + 5} differenced observations, got {w.size}"
        )
    if np.var(w) == 0.0:
        raise ValueError("series is constant after differencing; nothing to fit")

    z0 = _smart_start(spec, w)
    rng = np.random.default_rng(settings.seed)
    # All starts are drawn up front so the thread pool cannot change them.
    starts = [z0 if r == 0 else z0 + rng.normal(0.0, 0.5, size=z0.size) for r in range(settings.restarts)]

    def run_one(start: np.ndarray):
        return nelder_mead(
            lambda z: negative_loglik(z, spec, w),
            start,
            max_evals=settings.max_evals,
            ftol=settings.tolerance,
            xtol=settings.tolerance,
        )

    if threads > 1 and settings.restarts > 1:
        with ThreadPoolExecutor(max_workers=min(threads, settings.restarts)) as pool:
            results = list(pool.map(run_one, starts))
    else:
        results = [run_one(start) for start in starts]

    best = None
    best_restart = 0
    restart_logliks: list[float] = []
    total_evals = 0
    for r, result in enumerate(results):
        total_evals += result.n_evals
        restart_logliks.append(-result.fx)
        if best is None or result.fx < best.fx:
            best = result
            best_restart = r

    params = constrain_params(best.x, spec)
    preds, actuals = one_step_insample_predictions(spec, params, values)
    in_rmse = rmse(actuals, preds)

    out_rmse = None
    if holdout is not None:
        hold = holdout.as_array() if isinstance(holdout, TimeSeries) else np.asarray(holdout, dtype=float)
        if hold.size > 0:
            fc = forecast(spec, params, values, horizon=hold.size)
            out_rmse = rmse(hold, fc.points)

    return FitResult(
        spec=spec,
        params=params,
        loglik=-best.fx,
        converged=best.converged,
        n_evals=total_evals,
        rmse_in_sample=in_rmse,
        rmse_out_of_sample=out_rmse,
        best_restart=best_restart,
        restart_logliks=restart_logliks,
    )


def write_fit_json(result: FitResult, path: str | Path) -> None:
    Path(path).write_text(json.dumps(result.to_json(), indent=2, sort_keys=True) + "\n")
