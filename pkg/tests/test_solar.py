import math

import numpy as np
import pytest

from solarcast.solar import (
    DAY_HOURS,
    GeoPosition,
    SolarInstant,
    clear_sky_index,
    clear_sky_irradiance,
    clearness_index,
    daily_extraterrestrial_insolation,
    extraterrestrial_irradiance,
    solar_position,
    transmittance,
)

POS = GeoPosition(1.41, -78.28, 512.0)


def instant(julian_day, sin_beta, hour=12):
    return SolarInstant(julian_day, hour, 0.0, 0.0, sin_beta)


class TestExtraterrestrial:
    def test_overhead_sun_day3(self):
        # orbit factor cos(0) = 1 -> 1367 * 1.033
        assert extraterrestrial_irradiance(POS, instant(3, 1.0)) == pytest.approx(
            1412.111, abs=1e-9)

    def test_sun_at_horizon_is_zero(self):
        for day in (3, 100, 250):
            assert extraterrestrial_irradiance(POS, instant(day, 0.0)) == 0.0
            assert extraterrestrial_irradiance(POS, instant(day, -0.3)) == 0.0

    def test_linear_in_sin_beta(self):
        assert extraterrestrial_irradiance(POS, instant(3, 0.5)) == pytest.approx(
            706.0555, abs=1e-4)
        for sb in np.linspace(0.05, 0.5, 7):
            half = extraterrestrial_irradiance(POS, instant(200, sb))
            full = extraterrestrial_irradiance(POS, instant(200, 2 * sb))
            assert full == pytest.approx(2 * half, rel=1e-12)


class TestTransmittance:
    def test_overhead_value(self):
        # 0.56 * (e^-0.65 + e^-0.095), hand-evaluated
        assert transmittance(1.0) == pytest.approx(0.8015944782883786, abs=1e-12)

    def test_half_value(self):
        assert transmittance(0.5) == pytest.approx(0.61571491910733, abs=1e-12)

    def test_vanishes_at_horizon(self):
        assert transmittance(1e-4) < 1e-100

    def test_domain_error(self):
        with pytest.raises(ValueError):
            transmittance(0.0)
        with pytest.raises(ValueError):
            transmittance(-0.2)

    def test_monotone_and_bounded_on_grid(self):
        grid = np.linspace(1e-3, 1.0, 1000)
        taus = np.array([transmittance(s) for s in grid])
        assert np.all(np.diff(taus) >= 0.0)
        assert np.all(taus > 0.0)
        assert np.all(taus <= taus[-1])


class TestClearSky:
    def test_product_of_parts(self):
        inst = instant(3, 1.0)
        expected = extraterrestrial_irradiance(POS, inst) * transmittance(1.0)
        assert clear_sky_irradiance(POS, inst) == pytest.approx(expected, rel=1e-15)
        assert clear_sky_irradiance(POS, inst) == pytest.approx(1131.94, abs=0.01)

    def test_domain_error_below_horizon(self):
        with pytest.raises(ValueError):
            clear_sky_irradiance(POS, instant(3, 0.0))

    def test_never_exceeds_extraterrestrial(self):
        for day in range(1, 366, 7):
            for sb in np.linspace(0.01, 1.0, 25):
                inst = instant(day, sb)
                assert (clear_sky_irradiance(POS, inst)
                        <= extraterrestrial_irradiance(POS, inst))

    def test_monotone_in_sin_beta(self):
        assert (clear_sky_irradiance(POS, instant(3, 1.0))
                > clear_sky_irradiance(POS, instant(3, 0.5)))


class TestSolarPosition:
    def test_equatorial_noon_at_equinox(self):
        inst = solar_position(GeoPosition(0.0, 0.0), 81, 12)
        assert inst.sin_beta == pytest.approx(1.0, abs=0.01)

    def test_latitude_equals_declination_gives_unity(self):
        inst = solar_position(POS, 1, 12)
        phi_deg = math.degrees(inst.declination_rad)
        aligned = solar_position(GeoPosition(phi_deg, 0.0), 1, 12)
        assert aligned.sin_beta == pytest.approx(1.0, abs=1e-12)

    def test_sunrise_hour_is_near_horizon(self):
        inst = solar_position(POS, 1, 6)
        assert inst.sin_beta <= 0.1

    def test_formula_recomputable(self):
        for day in (1, 81, 172, 300):
            for hour in DAY_HOURS:
                inst = solar_position(POS, day, hour)
                phi = math.radians(POS.latitude_deg)
                recomputed = (math.cos(phi) * math.cos(inst.declination_rad)
                              * math.cos(inst.hour_angle_rad)
                              + math.sin(phi) * math.sin(inst.declination_rad))
                assert recomputed == inst.sin_beta

    def test_input_validation(self):
        with pytest.raises(ValueError):
            solar_position(POS, 0, 12)
        with pytest.raises(ValueError):
            solar_position(POS, 100, 5)


class TestDailyInsolation:
    def test_matches_hourly_sum(self):
        total = daily_extraterrestrial_insolation(POS, 81)
        by_hand = sum(
            extraterrestrial_irradiance(POS, solar_position(POS, 81, h))
            for h in DAY_HOURS
        )
        assert total == pytest.approx(by_hand, rel=1e-15)

    def test_polar_night_is_zero(self):
        assert daily_extraterrestrial_insolation(GeoPosition(89.0, 0.0), 355) == 0.0

    def test_exceeds_noon_value_at_equator(self):
        pos = GeoPosition(0.0, 0.0)
        total = daily_extraterrestrial_insolation(pos, 81)
        noon = extraterrestrial_irradiance(pos, solar_position(pos, 81, 12))
        assert total >= noon > 0.0


class TestIndices:
    def test_clear_sky_index(self):
        assert clear_sky_index(800.0, 800.0) == 1.0
        assert clear_sky_index(0.0, 800.0) == 0.0
        assert clear_sky_index(500.0, 1000.0) == 0.5
        with pytest.raises(ValueError):
            clear_sky_index(100.0, 0.0)

    def test_clearness_index(self):
        assert clearness_index(5000.0, 5000.0) == 1.0
        assert clearness_index(0.0, 5000.0) == 0.0
        assert clearness_index(2500.0, 5000.0) == 0.5
        with pytest.raises(ValueError):
            clearness_index(100.0, -1.0)


class TestGeoPosition:
    def test_range_validation(self):
        with pytest.raises(ValueError):
            GeoPosition(91.0, 0.0)
        with pytest.raises(ValueError):
            GeoPosition(0.0, 190.0)
        with pytest.raises(ValueError):
            GeoPosition(0.0, 0.0, -5.0)
