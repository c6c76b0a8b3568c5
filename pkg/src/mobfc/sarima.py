"""Seasonal ARIMA in state-space form with exact Kalman-filter likelihood.

The multiplicative seasonal model

    phi(B) PHI(B^s) (1-B)^d (1-B^s)^D (y_t - c) = theta(B) THETA(B^s) e_t

is expanded into a single ARMA(p + s*P, q + s*Q) on the differenced series
and put into the observation/transition form with state dimension
m = max(p + s*P, q + s*Q + 1).  The stationary initial state covariance is
the Lyapunov solution, so the likelihood is exact rather than conditional.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from typing import Sequence

import numpy as np

from .series import TimeSeries
from .stationarity import constrain_coeffs, roots_outside_unit_circle, unconstrain_coeffs


class NonStationaryError(ValueError):
    """AR or MA polynomial has a root on or inside the unit circle."""


class NumericalError(RuntimeError):
    """The filter produced a non-positive prediction variance."""


@dataclass(frozen=True)
class SarimaxSpec:
    p: int
    d: int
    q: int
    P: int = 0
    D: int = 0
    Q: int = 0
    s: int = 0
    with_constant: bool = False

    def __post_init__(self):
        for name in ("p", "d", "q", "P", "D", "Q", "s"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if (self.P, self.D, self.Q) != (0, 0, 0) and self.s < 2:
            raise ValueError(f"seasonal period s={self.s} requires s >= 2")

    @property
    def state_dim(self) -> int:
        return max(self.p + self.s * self.P, self.q + self.s * self.Q + 1)

    @property
    def n_params(self) -> int:
        return self.p + self.q + self.P + self.Q + 1 + (1 if self.with_constant else 0)


@dataclass(frozen=True)
class SarimaxParams:
    ar: tuple[float, ...] = ()
    ma: tuple[float, ...] = ()
    sar: tuple[float, ...] = ()
    sma: tuple[float, ...] = ()
    sigma2: float = 1.0
    const: float = 0.0


@dataclass
class StateSpace:
    transition: np.ndarray  # (m, m)
    observation: np.ndarray  # (m,) selects the first state element
    innovation: np.ndarray  # (m,) loading of the scalar innovation
    sigma2: float
    const: float
    initial_mean: np.ndarray  # (m,)
    initial_cov: np.ndarray  # (m, m) stationary Lyapunov solution

    @property
    def state_dim(self) -> int:
        return self.transition.shape[0]

    @property
    def state_cov(self) -> np.ndarray:
        """Innovation covariance contribution sigma2 * R R'."""
        return self.sigma2 * np.outer(self.innovation, self.innovation)


@dataclass
class KalmanResult:
    loglik: float
    one_step_preds: np.ndarray
    pred_variances: np.ndarray
    final_state: np.ndarray  # predicted state for the step after the last observation
    final_cov: np.ndarray

    def __iter__(self):
        return iter((self.loglik, self.one_step_preds, self.pred_variances))


@dataclass
class ForecastResult:
    points: np.ndarray
    lo95: np.ndarray
    hi95: np.ndarray
    variances: np.ndarray

    def __iter__(self):
        return iter((self.points, np.column_stack([self.lo95, self.hi95])))


def expand_multiplicative(
    nonseasonal: Sequence[float], seasonal: Sequence[float], s: int, kind: str
) -> np.ndarray:
    """Expanded lag coefficients of the seasonal/non-seasonal polynomial product.

    For kind="ar" the polynomial is (1 - sum a_i B^i)(1 - sum A_j B^{js}) and
    the returned c satisfy poly = 1 - sum c_k B^k; for kind="ma" both signs
    flip: (1 + sum ...), poly = 1 + sum c_k B^k.
    """
    sign = -1.0 if kind == "ar" else 1.0
    base = np.r_[1.0, sign * np.asarray(nonseasonal, dtype=float)]
    seas = np.zeros(s * len(seasonal) + 1)
    seas[0] = 1.0
    for j, coeff in enumerate(seasonal, start=1):
        seas[j * s] = sign * coeff
    full = np.convolve(base, seas)
    return sign * full[1:]


def _expanded(spec: SarimaxSpec, params: SarimaxParams) -> tuple[np.ndarray, np.ndarray]:
    if (len(params.ar), len(params.ma), len(params.sar), len(params.sma)) != (
        spec.p,
        spec.q,
        spec.P,
        spec.Q,
    ):
        raise ValueError("parameter lengths do not match the model orders")
    phi = expand_multiplicative(params.ar, params.sar, spec.s, "ar")
    theta = expand_multiplicative(params.ma, params.sma, spec.s, "ma")
    return phi, theta


def build_state_space(spec: SarimaxSpec, params: SarimaxParams) -> StateSpace:
    """Observation/transition matrices plus the stationary initialization.

    Raises NonStationaryError unless the expanded AR polynomial has all roots
    outside the unit circle (and likewise the MA polynomial, which keeps the
    model identified).
    """
    if params.sigma2 < 0:
        raise ValueError(f"sigma2 must be non-negative, got {params.sigma2}")
    phi, theta = _expanded(spec, params)
    if not roots_outside_unit_circle(np.r_[1.0, -phi]):
        raise NonStationaryError(f"AR polynomial is not stationary: phi={phi.tolist()}")
    if not roots_outside_unit_circle(np.r_[1.0, theta]):
        raise NonStationaryError(f"MA polynomial is not invertible: theta={theta.tolist()}")

    m = spec.state_dim
    T = np.zeros((m, m))
    T[: len(phi), 0] = phi
    for i in range(m - 1):
        T[i, i + 1] = 1.0
    Z = np.zeros(m)
    Z[0] = 1.0
    R = np.zeros(m)
    R[0] = 1.0
    R[1 : 1 + len(theta)] = theta

    # Stationary covariance: solve P = T P T' + sigma2 R R' by vectorization.
    rqr = params.sigma2 * np.outer(R, R)
    eye = np.eye(m * m)
    vec_p = np.linalg.solve(eye - np.kron(T, T), rqr.reshape(-1))
    P1 = vec_p.reshape(m, m)
    P1 = (P1 + P1.T) / 2.0

    return StateSpace(
        transition=T,
        observation=Z,
        innovation=R,
        sigma2=params.sigma2,
        const=params.const,
        initial_mean=np.zeros(m),
        initial_cov=P1,
    )


_LOG_2PI = float(np.log(2.0 * np.pi))

# Once consecutive prediction covariances agree this tightly the filter has
# hit steady state and the gain can be frozen.
_STEADY_STATE_TOL = 1e-13


def kalman_loglik(ss: StateSpace, y: Sequence[float] | TimeSeries) -> KalmanResult:
    """Prediction-error-decomposition Gaussian log-likelihood.

    one_step_preds[t] is E[y_t | y_0..y_{t-1}] (exact, stationary prior for
    t=0) and pred_variances[t] the matching variance.  The recursion freezes
    its gain once the covariance converges, which changes nothing beyond
    rounding but makes long filters cheap.
    """
    values = y.as_array() if isinstance(y, TimeSeries) else np.asarray(y, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("series must be a nonempty 1-d array")
    if not np.all(np.isfinite(values)):
        raise ValueError("series contains non-finite values")
    w = values - ss.const

    T = ss.transition
    R = ss.innovation
    rqr = ss.sigma2 * np.outer(R, R)
    a = ss.initial_mean.copy()
    P = ss.initial_cov.copy()

    n = w.size
    preds = np.empty(n)
    variances = np.empty(n)
    loglik = 0.0
    steady = False
    K = np.zeros_like(a)
    F = 0.0
    for t in range(n):
        if not steady:
            F = P[0, 0]
            if not np.isfinite(F) or F <= 0.0:
                raise NumericalError(f"non-positive prediction variance at t={t}: {F}")
            K = (T @ P[:, 0]) / F
            P_next = T @ P @ T.T + rqr - F * np.outer(K, K)
            P_next = (P_next + P_next.T) / 2.0
            if np.max(np.abs(P_next - P)) < _STEADY_STATE_TOL * (1.0 + F):
                steady = True
            P = P_next
        v = w[t] - a[0]
        preds[t] = a[0] + ss.const
        variances[t] = F
        loglik -= 0.5 * (_LOG_2PI + np.log(F) + v * v / F)
        a = T @ a + K * v

    return KalmanResult(
        loglik=float(loglik),
        one_step_preds=preds,
        pred_variances=variances,
        final_state=a,
        final_cov=P,
    )


def difference(values: np.ndarray, d: int, D: int, s: int) -> np.ndarray:
    """Apply d ordinary and D seasonal differences."""
    w = np.asarray(values, dtype=float)
    for _ in range(d):
        w = w[1:] - w[:-1]
    for _ in range(D):
        w = w[s:] - w[:-s]
    return w


def integration_poly(d: int, D: int, s: int) -> np.ndarray:
    """Coefficients (low to high) of (1-B)^d (1-B^s)^D."""
    poly = np.array([1.0])
    for _ in range(d):
        poly = np.convolve(poly, [1.0, -1.0])
    if D > 0:
        seas = np.zeros(s + 1)
        seas[0] = 1.0
        seas[s] = -1.0
        for _ in range(D):
            poly = np.convolve(poly, seas)
    return poly


def _psi_weights(phi: np.ndarray, theta: np.ndarray, n: int) -> np.ndarray:
    """MA(inf) weights of an ARMA given expanded coefficient vectors."""
    psi = np.zeros(n)
    psi[0] = 1.0
    for j in range(1, n):
        acc = theta[j - 1] if j - 1 < len(theta) else 0.0
        upto = min(j, len(phi))
        for i in range(1, upto + 1):
            acc += phi[i - 1] * psi[j - i]
        psi[j] = acc
    return psi


def forecast(
    spec: SarimaxSpec,
    params: SarimaxParams,
    series: TimeSeries | Sequence[float],
    horizon: int,
) -> ForecastResult:
    """Point forecasts with 95% intervals (point +/- 1.96 * stddev).

    For d = D = 0 the interval widths come from the exact Kalman prediction
    recursion; with differencing the points are integrated back and widths
    use the cumulative psi-weight variance of the integrated operator.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    values = series.as_array() if isinstance(series, TimeSeries) else np.asarray(series, dtype=float)

    if spec.d == 0 and spec.D == 0:
        ss = build_state_space(spec, params)
        result = kalman_loglik(ss, values)
        T = ss.transition
        rqr = ss.sigma2 * np.outer(ss.innovation, ss.innovation)
        a = result.final_state.copy()
        P = result.final_cov.copy()
        points = np.empty(horizon)
        variances = np.empty(horizon)
        for h in range(horizon):
            points[h] = a[0] + params.const
            variances[h] = P[0, 0]
            a = T @ a
            P = T @ P @ T.T + rqr
    else:
        w = difference(values, spec.d, spec.D, spec.s)
        ss = build_state_space(spec, params)
        result = kalman_loglik(ss, w)
        T = ss.transition
        a = result.final_state.copy()
        w_points = np.empty(horizon)
        for h in range(horizon):
            w_points[h] = a[0] + params.const
            a = T @ a
        # Integrate back: y_t = w_t - sum_{j>=1} c_j y_{t-j} over the
        # (1-B)^d (1-B^s)^D coefficients, feeding forecasts forward.
        c = integration_poly(spec.d, spec.D, spec.s)
        history = list(values)
        points = np.empty(horizon)
        for h in range(horizon):
            acc = w_points[h]
            for j in range(1, len(c)):
                acc -= c[j] * history[len(history) - j]
            points[h] = acc
            history.append(acc)
        # Interval widths from psi weights of the integrated ARIMA operator.
        phi, theta = _expanded(spec, params)
        full_ar_poly = np.convolve(np.r_[1.0, -phi], c)
        psi = _psi_weights(-full_ar_poly[1:], theta, horizon)
        variances = params.sigma2 * np.cumsum(psi * psi)

    half = 1.96 * np.sqrt(variances)
    return ForecastResult(points=points, lo95=points - half, hi95=points + half, variances=variances)


def one_step_insample_predictions(
    spec: SarimaxSpec, params: SarimaxParams, values: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """One-step-ahead predictions of the observed series and their targets.

    With differencing, predictions of the differenced series are mapped back
    to the observation scale using actual (not predicted) history, so entry
    t predicts y_t from y_0..y_{t-1}.  Returns (predictions, actuals)
    aligned over the valid span.
    """
    values = np.asarray(values, dtype=float)
    w = difference(values, spec.d, spec.D, spec.s)
    ss = build_state_space(spec, params)
    result = kalman_loglik(ss, w)
    offset = spec.d + spec.s * spec.D
    if offset == 0:
        return result.one_step_preds, values
    c = integration_poly(spec.d, spec.D, spec.s)
    preds = np.empty(len(w))
    for t in range(len(w)):
        acc = result.one_step_preds[t]
        for j in range(1, len(c)):
            acc -= c[j] * values[offset + t - j]
        preds[t] = acc
    return preds, values[offset:]


def simulate_sarma(
    spec: SarimaxSpec,
    params: SarimaxParams,
    n: int,
    seed: int,
    start: datetime | None = None,
    granularity: str = "day",
) -> TimeSeries:
    """Gaussian-innovation simulation of the (stationary) SARMA process.

    A burn-in of 10 * state_dim draws is discarded; output is deterministic
    per seed.  d and D are ignored (the simulator targets the stationary
    core used as a test oracle and demo generator).
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    phi, theta = _expanded(spec, params)
    if not roots_outside_unit_circle(np.r_[1.0, -phi]):
        raise NonStationaryError("cannot simulate a non-stationary model")
    rng = np.random.default_rng(seed)
    burn = 10 * spec.state_dim
    total = n + burn
    eps = rng.standard_normal(total) * np.sqrt(params.sigma2)
    x = np.zeros(total)
    np_, nq = len(phi), len(theta)
    for t in range(total):
        acc = eps[t]
        for i in range(1, min(t, np_) + 1):
            acc += phi[i - 1] * x[t - i]
        for j in range(1, min(t, nq) + 1):
            acc += theta[j - 1] * eps[t - j]
        x[t] = acc
    values = x[burn:] + params.const
    return TimeSeries(
        start=start or datetime(2013, 1, 1),
        granularity=granularity,
        values=tuple(float(v) for v in values),
    )


def constrain_params(z: Sequence[float], spec: SarimaxSpec) -> SarimaxParams:
    """Unconstrained vector -> valid parameters.

    Layout: [ar (p), ma (q), seasonal ar (P), seasonal ma (Q), log sigma2,
    const?].  AR blocks map through the partial-autocorrelation transform;
    MA blocks likewise with the sign flipped so the (1 + theta B ...) side
    stays invertible.  All zeros maps to all-zero coefficients, sigma2 = 1.
    """
    z = np.asarray(z, dtype=float)
    if z.size != spec.n_params:
        raise ValueError(f"expected {spec.n_params} unconstrained values, got {z.size}")
    pos = 0

    def take(k: int) -> np.ndarray:
        nonlocal pos
        block = z[pos : pos + k]
        pos += k
        return block

    ar = constrain_coeffs(take(spec.p))
    ma = -constrain_coeffs(take(spec.q))
    sar = constrain_coeffs(take(spec.P))
    sma = -constrain_coeffs(take(spec.Q))
    # Clamp the log-variance so wild optimizer probes overflow to a huge
    # finite value (rejected downstream) instead of warning on exp.
    sigma2 = float(np.exp(min(max(take(1)[0], -700.0), 700.0)))
    const = float(take(1)[0]) if spec.with_constant else 0.0
    return SarimaxParams(
        ar=tuple(ar), ma=tuple(ma), sar=tuple(sar), sma=tuple(sma), sigma2=sigma2, const=const
    )


def unconstrain_params(params: SarimaxParams, spec: SarimaxSpec) -> np.ndarray:
    """Inverse of constrain_params (round-trips to ~1e-10)."""
    parts = [
        unconstrain_coeffs(np.asarray(params.ar)),
        unconstrain_coeffs(-np.asarray(params.ma)),
        unconstrain_coeffs(np.asarray(params.sar)),
        unconstrain_coeffs(-np.asarray(params.sma)),
        [np.log(params.sigma2)],
    ]
    if spec.with_constant:
        parts.append([params.const])
    return np.concatenate([np.asarray(p, dtype=float) for p in parts])
