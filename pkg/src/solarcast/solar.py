"""Clear-sky solar model: extraterrestrial irradiance, Kreith & Kreider
transmittance, and the clear-sky / clearness indices.

Conventions: hours are station-local integers 6..18 (13 daylight slots),
angles are kept in radians internally, and hourly irradiance values in
Wh/m^2 are numerically equal to the mean W/m^2 over the hour, so daily
insolation is the plain sum of the 13 hourly values.
"""

import math
from dataclasses import dataclass

SOLAR_CONSTANT = 1367.0  # W/m^2
DAY_HOURS = tuple(range(6, 19))  # inclusive 6..18
HOURS_PER_DAY = len(DAY_HOURS)

_DEG = math.pi / 180.0


@dataclass(frozen=True)
class GeoPosition:
    """Station location. Altitude is carried for reporting only."""

    latitude_deg: float
    longitude_deg: float
    altitude_m: float = 0.0

    def __post_init__(self):
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise ValueError(f"latitude out of range: {self.latitude_deg}")
        if not -180.0 <= self.longitude_deg <= 180.0:
            raise ValueError(f"longitude out of range: {self.longitude_deg}")
        if self.altitude_m < 0.0:
            raise ValueError(f"altitude must be >= 0: {self.altitude_m}")


@dataclass(frozen=True)
class SolarInstant:
    """Sun geometry at one local hour of one day."""

    julian_day: int
    local_hour: int
    declination_rad: float
    hour_angle_rad: float
    sin_beta: float


def declination_rad(julian_day: int) -> float:
    """Cooper's declination formula, in radians."""
    return 23.45 * _DEG * math.sin(2.0 * math.pi * (284 + julian_day) / 365.0)


def hour_angle_rad(local_hour: int) -> float:
    """15 degrees per hour from solar noon."""
    return 15.0 * _DEG * (local_hour - 12)


def solar_position(pos: GeoPosition, julian_day: int, local_hour: int) -> SolarInstant:
    if not 1 <= julian_day <= 366:
        raise ValueError(f"julian_day out of range: {julian_day}")
    if not 6 <= local_hour <= 18:
        raise ValueError(f"local_hour out of range: {local_hour}")
    phi = pos.latitude_deg * _DEG
    delta = declination_rad(julian_day)
    omega = hour_angle_rad(local_hour)
    sin_beta = (math.cos(phi) * math.cos(delta) * math.cos(omega)
                + math.sin(phi) * math.sin(delta))
    return SolarInstant(julian_day, local_hour, delta, omega, sin_beta)


def extraterrestrial_irradiance(pos: GeoPosition, instant: SolarInstant) -> float:
    """Top-of-atmosphere irradiance; 0 when the sun is at or below the horizon."""
    if instant.sin_beta <= 0.0:
        return 0.0
    orbit = 1.0 + 0.033 * math.cos(2.0 * math.pi * (instant.julian_day - 3) / 365.0)
    return SOLAR_CONSTANT * orbit * instant.sin_beta


def transmittance(sin_beta: float) -> float:
    """Kreith & Kreider atmospheric transmittance; needs the sun above horizon."""
    if sin_beta <= 0.0:
        raise ValueError(f"transmittance undefined for sin_beta={sin_beta}")
    return 0.56 * (math.exp(-0.65 / sin_beta) + math.exp(-0.095 / sin_beta))


def clear_sky_irradiance(pos: GeoPosition, instant: SolarInstant) -> float:
    if instant.sin_beta <= 0.0:
        raise ValueError(
            f"clear-sky irradiance undefined at sin_beta={instant.sin_beta}")
    return extraterrestrial_irradiance(pos, instant) * transmittance(instant.sin_beta)


def daily_extraterrestrial_insolation(pos: GeoPosition, julian_day: int) -> float:
    """Sum of the 13 hourly extraterrestrial values, Wh/(m^2 day)."""
    return sum(
        extraterrestrial_irradiance(pos, solar_position(pos, julian_day, h))
        for h in DAY_HOURS
    )


def daily_clear_sky_insolation(pos: GeoPosition, julian_day: int) -> float:
    """Sum of hourly clear-sky irradiance over slots with the sun up."""
    total = 0.0
    for h in DAY_HOURS:
        instant = solar_position(pos, julian_day, h)
        if instant.sin_beta > 0.0:
            total += clear_sky_irradiance(pos, instant)
    return total


def clear_sky_index(measured: float, clear_sky: float) -> float:
    """kc = measured / clear-sky irradiance. Not clamped: quality control
    bounds measured by I0 = I_cst / tau, so kc may legitimately exceed 1."""
    if clear_sky <= 0.0:
        raise ValueError(f"clear-sky irradiance must be > 0, got {clear_sky}")
    return measured / clear_sky


def clearness_index(daily_insolation: float, h0: float) -> float:
    """Kt = daily insolation / extraterrestrial insolation."""
    if h0 <= 0.0:
        raise ValueError(f"extraterrestrial insolation must be > 0, got {h0}")
    return daily_insolation / h0
