"""Bijection between unconstrained optimizer coordinates and valid
AR/MA coefficients, via the partial-autocorrelation parameterization.

Each unconstrained real maps to a partial autocorrelation in (-1, 1); the
Durbin-Levinson recursion then yields coefficients whose lag polynomial has
all roots outside the unit circle.  The map is smooth and invertible, so the
optimizer can roam all of R^n while every candidate stays stationary and
invertible.
"""
from __future__ import annotations

import numpy as np


def pacf_to_coeffs(pacf: np.ndarray) -> np.ndarray:
    """Durbin-Levinson: partial autocorrelations -> AR coefficients.

    The returned phi make 1 - phi_1 B - ... - phi_p B^p stable whenever
    every |pacf| < 1.
    """
    pacf = np.asarray(pacf, dtype=float)
    a = np.zeros(0)
    for k, r in enumerate(pacf, start=1):
        a_new = np.empty(k)
        a_new[: k - 1] = a - r * a[::-1]
        a_new[k - 1] = r
        a = a_new
    return a


def coeffs_to_pacf(coeffs: np.ndarray) -> np.ndarray:
    """Inverse Durbin-Levinson; requires a stable coefficient vector."""
    a = np.asarray(coeffs, dtype=float).copy()
    p = len(a)
    pacf = np.empty(p)
    for k in range(p, 0, -1):
        r = a[k - 1]
        pacf[k - 1] = r
        if abs(r) >= 1.0:
            raise ValueError(f"coefficients are not stable (|pacf| = {abs(r)} >= 1)")
        if k > 1:
            prev = a[: k - 1]
            a = (prev + r * prev[::-1]) / (1.0 - r * r)
    return pacf


def constrain_coeffs(z: np.ndarray) -> np.ndarray:
    """Unconstrained reals -> stable coefficients: z -> r = z/sqrt(1+z^2) -> phi."""
    z = np.asarray(z, dtype=float)
    return pacf_to_coeffs(z / np.sqrt(1.0 + z * z))


def unconstrain_coeffs(coeffs: np.ndarray) -> np.ndarray:
    """Stable coefficients -> unconstrained reals (exact inverse of constrain)."""
    r = coeffs_to_pacf(coeffs)
    return r / np.sqrt(1.0 - r * r)


def roots_outside_unit_circle(poly_low_to_high: np.ndarray, margin: float = 0.0) -> bool:
    """True when every root of c0 + c1 z + ... lies strictly outside |z| = 1 + margin.

    Degenerate (constant) polynomials count as stable.
    """
    coeffs = np.asarray(poly_low_to_high, dtype=float)
    coeffs = np.trim_zeros(coeffs, "b")
    if len(coeffs) <= 1:
        return True
    roots = np.roots(coeffs[::-1])
    return bool(np.all(np.abs(roots) > 1.0 + margin))
