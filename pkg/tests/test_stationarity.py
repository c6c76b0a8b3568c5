"""Stationarity-preserving parameter transform tests."""
from __future__ import annotations

import numpy as np
import pytest

from mobfc.stationarity import (
    coeffs_to_pacf,
    constrain_coeffs,
    pacf_to_coeffs,
    roots_outside_unit_circle,
    unconstrain_coeffs,
)


class TestDurbinLevinson:
    def test_single_lag_is_identity(self):
        assert pacf_to_coeffs(np.array([0.6]))[0] == 0.6
        assert coeffs_to_pacf(np.array([0.6]))[0] == 0.6

    def test_two_lag_closed_form(self):
        # phi1 = r1(1 - r2), phi2 = r2.
        r = np.array([0.5, -0.3])
        phi = pacf_to_coeffs(r)
        assert phi[0] == pytest.approx(0.5 * (1 - (-0.3)), abs=1e-14)
        assert phi[1] == pytest.approx(-0.3, abs=1e-14)

    def test_round_trip_many_orders(self):
        rng = np.random.default_rng(0)
        for p in (1, 2, 3, 5, 8):
            for _ in range(20):
                r = rng.uniform(-0.95, 0.95, size=p)
                back = coeffs_to_pacf(pacf_to_coeffs(r))
                assert np.max(np.abs(back - r)) < 1e-10

    def test_output_polynomial_is_stable(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            r = rng.uniform(-0.999, 0.999, size=4)
            phi = pacf_to_coeffs(r)
            assert roots_outside_unit_circle(np.r_[1.0, -phi])

    def test_unstable_coeffs_rejected_by_inverse(self):
        with pytest.raises(ValueError):
            coeffs_to_pacf(np.array([1.5]))


class TestConstrain:
    def test_zero_maps_to_zero(self):
        assert np.array_equal(constrain_coeffs(np.zeros(3)), np.zeros(3))

    def test_round_trip(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            z = rng.normal(0.0, 2.0, size=3)
            z_back = unconstrain_coeffs(constrain_coeffs(z))
            assert np.max(np.abs(z - z_back)) < 1e-9

    def test_scalar_map_is_odd(self):
        # Oddness holds for the order-1 map (the one the reference model
        # uses); higher orders pick up cross terms and are not odd.
        for z in (0.3, 1.7, -2.4):
            a = constrain_coeffs(np.array([z]))
            b = constrain_coeffs(np.array([-z]))
            assert a[0] == pytest.approx(-b[0], abs=1e-14)

    def test_extreme_inputs_stay_stable(self):
        for scale in (10.0, 100.0, 1000.0):
            phi = constrain_coeffs(np.array([scale, -scale]))
            assert roots_outside_unit_circle(np.r_[1.0, -phi])

    def test_empty_vector_passes_through(self):
        assert constrain_coeffs(np.zeros(0)).size == 0
        assert unconstrain_coeffs(np.zeros(0)).size == 0


class TestRootCheck:
    def test_ar1_threshold(self):
        assert roots_outside_unit_circle(np.array([1.0, -0.99]))
        assert not roots_outside_unit_circle(np.array([1.0, -1.0]))
        assert not roots_outside_unit_circle(np.array([1.0, -1.01]))

    def test_margin_tightens_the_test(self):
        poly = np.array([1.0, -0.95])  # root at ~1.0526
        assert roots_outside_unit_circle(poly)
        assert not roots_outside_unit_circle(poly, margin=0.1)

    def test_constant_polynomial_is_stable(self):
        assert roots_outside_unit_circle(np.array([1.0]))
        assert roots_outside_unit_circle(np.array([1.0, 0.0, 0.0]))

    def test_complex_root_pair(self):
        # 1 - B + 0.5 B^2 has roots at 1 +- i, |root| = sqrt(2) > 1.
        assert roots_outside_unit_circle(np.array([1.0, -1.0, 0.5]))
        # 1 - B + B^2 has roots on |z| = 1.
        assert not roots_outside_unit_circle(np.array([1.0, -1.0, 1.0]))
