import math
import time

import numpy as np
import pytest

from dnlslab.theory import (
    classify_phase,
    condensate_fraction,
    continuum_exponent,
    critical_theta,
    free_energy,
    g_theta,
)


class TestGTheta:
    def test_endpoint_values(self):
        assert g_theta(2.0) == pytest.approx(0.5 + math.log(0.5), abs=1e-14)
        assert g_theta(2.0) < 0.0
        assert g_theta(3.0) == pytest.approx(0.3116667207, abs=1e-9)
        assert g_theta(3.0) > 0.0

    def test_domain(self):
        with pytest.raises(ValueError):
            g_theta(1.99)

    def test_strictly_increasing(self):
        grid = np.linspace(2.0, 10.0, 400)
        vals = [g_theta(t) for t in grid]
        assert all(b > a for a, b in zip(vals, vals[1:]))


class TestCriticalTheta:
    def test_root_value(self):
        tc = critical_theta(1e-6)
        assert tc == pytest.approx(2.455407, abs=1e-5)

    def test_root_brackets(self):
        tc = critical_theta(1e-6)
        assert g_theta(tc - 1e-6) < 0.0 < g_theta(tc + 1e-6)
        assert abs(g_theta(tc)) < 1e-12

    def test_cached_and_fast(self):
        critical_theta()  # warm the cache
        t0 = time.perf_counter()
        for _ in range(100):
            critical_theta(1e-6)
        assert (time.perf_counter() - t0) / 100 < 1e-3

    def test_bad_tol(self):
        with pytest.raises(ValueError):
            critical_theta(0.0)


class TestFreeEnergy:
    def test_flat_below_threshold(self):
        assert free_energy(0.0, 1.0) == pytest.approx(math.log(math.pi * math.e), abs=1e-14)
        assert free_energy(1.0, 1.0) == free_energy(2.0, 1.0)

    def test_supercritical_value(self):
        assert free_energy(4.0, 1.0) == pytest.approx(
            math.log(math.pi * math.e) + g_theta(4.0), abs=1e-14
        )
        assert free_energy(4.0, 1.0) == pytest.approx(3.13785, abs=1e-4)

    def test_continuity_at_threshold(self):
        tc = critical_theta()
        for B in (1.0, 0.5, 2.0):
            bc = tc / B**2
            assert abs(free_energy(bc + 1e-9, B) - free_energy(bc - 1e-9, B)) < 1e-8

    def test_first_order_kink(self):
        # zero left slope, positive right slope at the transition
        tc = critical_theta()
        delta = 1e-4
        for B in (1.0, 1.5):
            bc = tc / B**2
            left = (free_energy(bc, B) - free_energy(bc - delta, B)) / delta
            right = (free_energy(bc + delta, B) - free_energy(bc, B)) / delta
            g_slope = (g_theta(tc + delta) - g_theta(tc)) / delta
            assert left == 0.0
            assert right >= g_slope * B**2 / 2 > 0.0

    def test_monotone_in_beta(self):
        B = 1.3
        grid = np.linspace(0.0, 6.0, 200)
        vals = [free_energy(b, B) for b in grid]
        assert all(b2 >= b1 - 1e-15 for b1, b2 in zip(vals, vals[1:]))

    def test_rejects_negative_beta(self):
        with pytest.raises(ValueError):
            free_energy(-0.5, 1.0)


class TestCondensateFraction:
    def test_at_lower_edge(self):
        a, e = condensate_fraction(2.0, 1.0)
        assert a == pytest.approx(0.5)
        assert e == pytest.approx(-0.25)

    def test_at_threshold(self):
        tc = critical_theta()
        a, _ = condensate_fraction(tc, 1.0)
        assert a == pytest.approx(0.7153, abs=1e-4)

    def test_deep_supercritical(self):
        a, e = condensate_fraction(4.0, 1.0)
        assert a == pytest.approx(0.8535533905932737, rel=1e-12)
        assert e == pytest.approx(-0.7285533905932737, rel=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            condensate_fraction(1.0, 1.0)

    def test_majority_fraction_above_threshold(self):
        tc = critical_theta()
        for theta in np.linspace(tc + 1e-6, 40.0, 60):
            B = 1.7
            a, _ = condensate_fraction(theta / B**2, B)
            assert a / B > 0.5

    def test_monotone_saturating(self):
        B = 1.0
        grid = np.linspace(2.0, 400.0, 300)
        avals = [condensate_fraction(th, B)[0] for th in grid]
        assert all(a2 >= a1 for a1, a2 in zip(avals, avals[1:]))
        assert avals[-1] == pytest.approx(B, abs=5e-3)


class TestContinuumExponent:
    def test_fractional_branch(self):
        assert continuum_exponent(0.75) == 0.75

    def test_local_branch(self):
        assert continuum_exponent(2.0) == 1.0
        assert continuum_exponent(1.0) == 1.0

    def test_domain(self):
        with pytest.raises(ValueError):
            continuum_exponent(0.5)


def test_classify_phase():
    tc = critical_theta()
    assert classify_phase(1.0, 1.0).phase == "subcritical"
    assert classify_phase(4.0, 1.0).phase == "supercritical"
    assert classify_phase(tc, 1.0).phase == "critical"
    assert classify_phase(tc / 4.0, 2.0).phase == "critical"
