"""Physical-limit quality control for hourly irradiance records.

A slot at day D, hour h is retained iff
``0.03 * I_cst(D, h) <= value <= I0(D, h)`` (both bounds inclusive).
Slots where the sun is at or below the horizon have no defined clear-sky
value; any measurement there is treated as a sensor artifact and dropped
under the below-lower counter.
"""

from dataclasses import dataclass

import numpy as np

from .data import HourlySeries, Provenance, SeriesUnit
from .solar import (
    DAY_HOURS,
    GeoPosition,
    clear_sky_irradiance,
    extraterrestrial_irradiance,
    solar_position,
)

LOWER_CLEAR_SKY_FRACTION = 0.03


@dataclass(frozen=True)
class QcReport:
    n_input: int
    n_dropped_incomplete: int
    n_dropped_above_upper: int
    n_dropped_below_lower: int
    n_retained: int

    def __post_init__(self):
        total = (self.n_dropped_incomplete + self.n_dropped_above_upper
                 + self.n_dropped_below_lower + self.n_retained)
        if total != self.n_input:
            raise ValueError("QC counters do not partition the input")

    def as_dict(self) -> dict:
        return {
            "n_input": self.n_input,
            "n_dropped_incomplete": self.n_dropped_incomplete,
            "n_dropped_above_upper": self.n_dropped_above_upper,
            "n_dropped_below_lower": self.n_dropped_below_lower,
            "n_retained": self.n_retained,
        }


def hourly_bounds(pos: GeoPosition, julian_day: int) -> tuple[np.ndarray, np.ndarray]:
    """(lower, upper) acceptance bounds for the 13 slots of one day.

    Slots with the sun at or below the horizon get NaN bounds.
    """
    lower = np.full(len(DAY_HOURS), np.nan)
    upper = np.full(len(DAY_HOURS), np.nan)
    for j, hour in enumerate(DAY_HOURS):
        instant = solar_position(pos, julian_day, hour)
        if instant.sin_beta <= 0.0:
            continue
        upper[j] = extraterrestrial_irradiance(pos, instant)
        lower[j] = LOWER_CLEAR_SKY_FRACTION * clear_sky_irradiance(pos, instant)
    return lower, upper


def apply_qc(series: HourlySeries, pos: GeoPosition) -> tuple[HourlySeries, QcReport]:
    """Drop out-of-bounds measurements; dropped slots become missing."""
    if series.unit is not SeriesUnit.IRRADIANCE:
        raise ValueError("quality control runs on irradiance series only")
    if np.any(series.flags == Provenance.IMPUTED):
        raise ValueError("quality control must run before imputation")

    values = series.values.copy()
    flags = series.flags.copy()
    n_above = n_below = 0
    for i in range(series.n_days):
        lower, upper = hourly_bounds(pos, series.julian_day_for(i))
        for j in range(len(DAY_HOURS)):
            if flags[i, j] != Provenance.MEASURED:
                continue
            v = values[i, j]
            if np.isnan(upper[j]) or v < lower[j]:
                n_below += 1
            elif v > upper[j]:
                n_above += 1
            else:
                continue
            values[i, j] = np.nan
            flags[i, j] = Provenance.MISSING

    report = QcReport(
        n_input=int(series.flags.size),
        n_dropped_incomplete=int((series.flags == Provenance.MISSING).sum()),
        n_dropped_above_upper=n_above,
        n_dropped_below_lower=n_below,
        n_retained=int((flags == Provenance.MEASURED).sum()),
    )
    return series.replace(values=values, flags=flags), report
